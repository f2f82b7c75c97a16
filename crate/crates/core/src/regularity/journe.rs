//! Limit polynomial of the grid interpolants along S_m and its residual in
//! a cone, for functions that are C^(l,alpha) along two transverse plaque
//! families.

use super::grids::{build_grids, PlaquePair};
use super::interp::solve_rect;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct JourneConfig {
    pub plaques: PlaquePair,
    pub ell: usize,
    pub alpha: f64,
    pub r: f64,
    pub w: Option<[f64; 2]>,
    pub m_min: u32,
    pub m_max: u32,
    pub kappa: f64,
    /// Cone residuals are sampled for |z| in [cone_min, cone_max].
    pub cone_min: f64,
    pub cone_max: f64,
    pub cone_shells: usize,
    pub cone_directions: usize,
    pub ceiling: f64,
}

impl JourneConfig {
    pub fn new(ell: usize, alpha: f64) -> Self {
        JourneConfig {
            plaques: PlaquePair::flat(),
            ell,
            alpha,
            r: 0.5,
            w: None,
            m_min: 4,
            m_max: 24,
            kappa: 2.5,
            cone_min: 1e-2,
            cone_max: 0.25,
            cone_shells: 12,
            cone_directions: 9,
            ceiling: 10.0,
        }
    }
}

/// Polynomial sum c_pq x^p y^q over p + q <= l.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPoly {
    pub terms: Vec<((u32, u32), f64)>,
}

impl LimitPoly {
    pub fn eval(&self, z: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|((p, q), c)| c * z[0].powi(*p as i32) * z[1].powi(*q as i32))
            .sum()
    }

    pub fn coeff(&self, p: u32, q: u32) -> f64 {
        self.terms.iter().find(|(e, _)| *e == (p, q)).map(|t| t.1).unwrap_or(0.0)
    }

    /// Same polynomial with x and y exchanged.
    pub fn swapped(&self) -> Self {
        let mut terms: Vec<((u32, u32), f64)> = self.terms.iter().map(|((p, q), c)| ((*q, *p), *c)).collect();
        terms.sort_by_key(|((p, q), _)| (p + q, std::cmp::Reverse(*p)));
        LimitPoly { terms }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JourneRow {
    pub m: u32,
    pub r_m: f64,
    pub eta_m: f64,
    pub ratio: f64,
    pub coeffs: LimitPoly,
    /// max over p + q <= l of |c^(m) - c^(m-1)| R_m^(p+q); NaN for the first row.
    pub scaled_difference: f64,
    /// Local decay exponent of `scaled_difference` against R_m.
    pub c_decay_exponent: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub p: u32,
    pub q: u32,
    /// Slope of log |c^(m+1) - c^(m)| against log R_m, when at least three
    /// differences clear the noise floor.
    pub exponent: Option<f64>,
    pub expected: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JourneReport {
    pub rows: Vec<JourneRow>,
    pub limit: LimitPoly,
    pub decay: Vec<DecayFit>,
    /// (|z|, |psi(z) - P(z)| / |z|^(l+alpha)) on cone samples.
    pub cone_residuals: Vec<(f64, f64)>,
    pub max_cone_ratio: f64,
    pub admits: bool,
}

fn truncate(interp: &super::interp::RectInterp, ell: usize) -> LimitPoly {
    let mut terms = Vec::new();
    for d in 0..=ell as u32 {
        for p in (0..=d).rev() {
            let q = d - p;
            terms.push(((p, q), interp.coeff(p as usize, q as usize)));
        }
    }
    LimitPoly { terms }
}

fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn journe_limit_poly(psi: &dyn Fn([f64; 2]) -> f64, cfg: &JourneConfig) -> Result<JourneReport> {
    if cfg.m_max < cfg.m_min {
        return Err(Error::InvalidArgument("empty m range".into()));
    }
    let grids = build_grids(&cfg.plaques, cfg.r, cfg.ell, cfg.w, cfg.m_min..=cfg.m_max, cfg.kappa)?;
    let mut rows: Vec<JourneRow> = Vec::with_capacity(grids.len());
    let mut floors: Vec<Vec<f64>> = Vec::new();
    let mut prev_live: Option<(f64, f64)> = None;
    for gs in &grids {
        let vals: Vec<f64> = gs.grid.points.iter().map(|&z| psi(z)).collect();
        let interp = solve_rect(&gs.grid, &vals)?;
        let coeffs = truncate(&interp, cfg.ell);
        let noise: Vec<f64> = coeffs
            .terms
            .iter()
            .map(|((p, q), _)| 64.0 * f64::EPSILON * interp.inverse_norm * interp.sup_b.max(f64::MIN_POSITIVE) / interp.r.powi((p + q) as i32))
            .collect();
        let (mut scaled, mut local) = (f64::NAN, f64::NAN);
        if let Some(prev) = rows.last() {
            let mut worst = 0.0f64;
            let mut floor = 0.0f64;
            for (i, ((p, q), c)) in coeffs.terms.iter().enumerate() {
                let w = gs.r_m.powi((p + q) as i32);
                worst = worst.max((c - prev.coeffs.terms[i].1).abs() * w);
                floor = floor.max(100.0 * noise[i].max(floors.last().unwrap()[i]) * w);
            }
            scaled = worst;
            if worst > floor {
                if let Some((pd, pr)) = prev_live {
                    local = (worst / pd).ln() / (gs.r_m / pr).ln();
                }
                prev_live = Some((worst, gs.r_m));
            }
        }
        rows.push(JourneRow {
            m: gs.m,
            r_m: gs.r_m,
            eta_m: gs.eta_m,
            ratio: gs.ratio,
            coeffs,
            scaled_difference: scaled,
            c_decay_exponent: local,
            bound_holds: gs.bounds_hold(),
        });
        floors.push(noise);
    }
    let limit = rows.last().unwrap().coeffs.clone();
    let mut decay = Vec::new();
    for (i, ((p, q), _)) in limit.terms.iter().enumerate() {
        let mut pts = Vec::new();
        for m in 1..rows.len() {
            let d = (rows[m].coeffs.terms[i].1 - rows[m - 1].coeffs.terms[i].1).abs();
            let floor = 100.0 * floors[m][i].max(floors[m - 1][i]);
            if d > floor {
                pts.push((rows[m - 1].r_m.ln(), d.ln()));
            }
        }
        decay.push(DecayFit {
            p: *p,
            q: *q,
            exponent: if pts.len() >= 3 { Some(ols_slope(&pts)) } else { None },
            expected: cfg.ell as f64 + cfg.alpha - (p + q) as f64,
            points: pts.len(),
        });
    }
    let order = cfg.ell as f64 + cfg.alpha;
    let mut cone_residuals = Vec::new();
    let half = cfg.kappa.atan();
    for s in 0..cfg.cone_shells {
        let t = if cfg.cone_shells > 1 { s as f64 / (cfg.cone_shells - 1) as f64 } else { 0.0 };
        let rho = cfg.cone_max * (cfg.cone_min / cfg.cone_max).powf(t);
        for d in 0..cfg.cone_directions {
            let u = if cfg.cone_directions > 1 { d as f64 / (cfg.cone_directions - 1) as f64 } else { 0.5 };
            let th = -half + 2.0 * half * u;
            for side in [0.0, std::f64::consts::PI] {
                let z = [rho * (th + side).cos(), rho * (th + side).sin()];
                let ratio = (psi(z) - limit.eval(z)).abs() / rho.powf(order);
                cone_residuals.push((rho, ratio));
            }
        }
    }
    let max_cone_ratio = cone_residuals.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(JourneReport {
        rows,
        limit,
        decay,
        cone_residuals,
        max_cone_ratio,
        admits: max_cone_ratio <= cfg.ceiling,
    })
}

/// Max coefficient difference between the limit polynomials of the cone
/// K run and the K' run, which exchanges the roles of the coordinates.
/// `w_prime` is the substitution point of the K' run in exchanged
/// coordinates.
pub fn cone_agreement(psi: &dyn Fn([f64; 2]) -> f64, cfg: &JourneConfig, w_prime: Option<[f64; 2]>) -> Result<f64> {
    let a = journe_limit_poly(psi, cfg)?;
    let swapped_psi = |z: [f64; 2]| psi([z[1], z[0]]);
    let mut cfg2 = cfg.clone();
    cfg2.plaques = cfg.plaques.swapped();
    cfg2.w = w_prime;
    let b = journe_limit_poly(&swapped_psi, &cfg2)?.limit.swapped();
    Ok(a.limit
        .terms
        .iter()
        .map(|((p, q), c)| (c - b.coeff(*p, *q)).abs())
        .fold(0.0, f64::max))
}
