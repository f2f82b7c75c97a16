//! Solving phi = Phi o A - Phi + c by integrating periodic cycle functionals
//! along su-paths, with obstruction witnesses when no solution exists.

use rand::Rng as _;
use rayon::prelude::*;

use crate::cocycle::FourierCocycle;
use crate::error::{Error, Result};
use crate::pcf::pcf_path;
use crate::rng::seeded;
use crate::torus::{
    bracket_candidates, primitive_orbits, su_path, AccessibleCycle, HyperbolicAutomorphism, RationalPoint, SuLeg, SuPath, TorusPoint,
};

pub const DEFAULT_BRACKET_RADIUS: f64 = 2.0;
const WITNESS_MARGIN: f64 = 1e-9;

/// Transfer function sampled on the uniform grid (i/n, j/n), row-major in i.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSolution {
    pub anchor: TorusPoint,
    pub constant: f64,
    pub grid_n: usize,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub residual_sup: f64,
    pub consistency_spread: Option<f64>,
}

impl TransferSolution {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_n + j]
    }

    pub fn node(&self, i: usize, j: usize) -> TorusPoint {
        let n = self.grid_n as f64;
        TorusPoint {
            x1: i as f64 / n,
            x2: j as f64 / n,
        }
    }

    /// Periodic bilinear interpolation of the node values.
    pub fn interpolate(&self, p: &TorusPoint) -> f64 {
        let n = self.grid_n;
        let (u, v) = (p.x1 * n as f64, p.x2 * n as f64);
        let (i0, j0) = (u.floor(), v.floor());
        let (fu, fv) = (u - i0, v - j0);
        let i0 = (i0 as usize) % n;
        let j0 = (j0 as usize) % n;
        let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
        let f = |i: usize, j: usize| self.values[i * n + j];
        (1.0 - fu) * (1.0 - fv) * f(i0, j0) + fu * (1.0 - fv) * f(i1, j0) + (1.0 - fu) * fv * f(i0, j1) + fu * fv * f(i1, j1)
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessKind {
    PeriodicOrbit(Vec<RationalPoint>),
    AccessibleCycle(AccessibleCycle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionWitness {
    pub kind: WitnessKind,
    /// |sum of phi - c| over the orbit, or |PCF| around the cycle.
    pub magnitude: f64,
    /// Lower bound on the true magnitude after numerical error.
    pub certified_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Coboundary(TransferSolution),
    Obstructed(ObstructionWitness),
}

/// The constant c in the cohomological equation is the mean of phi.
pub fn mean_constant(phi: &FourierCocycle) -> f64 {
    phi.mean()
}

/// Periodic orbits of minimal period <= max_period whose Birkhoff sum of
/// phi - c is certifiably nonzero, shortest period first and by decreasing
/// magnitude within a period.
pub fn periodic_obstruction(phi: &FourierCocycle, a: &HyperbolicAutomorphism, max_period: u32) -> Result<Vec<ObstructionWitness>> {
    let centered = phi.centered();
    let sup = centered.sup_bound();
    let mut out = Vec::new();
    for n in 1..=max_period {
        for orbit in primitive_orbits(a, n, max_period)? {
            let s = centered.orbit_sum(&orbit);
            let err = 16.0 * f64::EPSILON * sup * (orbit.period() as f64) * (1.0 + centered.mode_count() as f64);
            if s.abs() > err + WITNESS_MARGIN {
                out.push(ObstructionWitness {
                    magnitude: s.abs(),
                    certified_floor: s.abs() - err,
                    kind: WitnessKind::PeriodicOrbit(orbit.points),
                });
            }
        }
    }
    let period = |w: &ObstructionWitness| match &w.kind {
        WitnessKind::PeriodicOrbit(p) => p.len(),
        WitnessKind::AccessibleCycle(_) => usize::MAX,
    };
    out.sort_by(|p, q| period(p).cmp(&period(q)).then(q.magnitude.partial_cmp(&p.magnitude).unwrap()));
    Ok(out)
}

/// Phi on the n x n grid: Phi(y) = -PCF(anchor -> y) for phi - c, so that
/// Phi(anchor) = 0.
pub fn solve_via_su_paths(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    anchor: &TorusPoint,
    grid_n: usize,
    tol: f64,
    radius: f64,
) -> Result<TransferSolution> {
    if grid_n == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    let c = mean_constant(phi);
    let centered = phi.centered();
    let results: Vec<Result<(f64, f64)>> = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / grid_n, idx % grid_n);
            let y = TorusPoint {
                x1: i as f64 / grid_n as f64,
                x2: j as f64 / grid_n as f64,
            };
            let path = su_path(a, anchor, &y, radius)?;
            let p = pcf_path(&centered, a, &path, tol)?;
            Ok((-p.value, p.error_bound))
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut errors = Vec::with_capacity(results.len());
    for r in results {
        let (v, e) = r?;
        values.push(v);
        errors.push(e);
    }
    let mut sol = TransferSolution {
        anchor: *anchor,
        constant: c,
        grid_n,
        values,
        errors,
        residual_sup: 0.0,
        consistency_spread: None,
    };
    sol.residual_sup = residual(phi, a, &sol);
    Ok(sol)
}

/// sup over grid nodes p of |phi(p) - Phi(A p) + Phi(p) - c|. A maps grid
/// nodes to grid nodes, so no interpolation enters.
pub fn residual(phi: &FourierCocycle, a: &HyperbolicAutomorphism, sol: &TransferSolution) -> f64 {
    let n = sol.grid_n as i64;
    let m = a.matrix();
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ai = (m[0][0] * i + m[0][1] * j).rem_euclid(n) as usize;
            let aj = (m[1][0] * i + m[1][1] * j).rem_euclid(n) as usize;
            let p = sol.node(i as usize, j as usize);
            let r = phi.eval(&p) - sol.value(ai, aj) + sol.value(i as usize, j as usize) - sol.constant;
            sup = sup.max(r.abs());
        }
    }
    sup
}

/// Same residual at cell centres, using bilinear interpolation of Phi.
pub fn interpolated_residual(phi: &FourierCocycle, a: &HyperbolicAutomorphism, sol: &TransferSolution) -> f64 {
    let n = sol.grid_n;
    let h = 1.0 / n as f64;
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let p = TorusPoint {
                x1: (i as f64 + 0.5) * h,
                x2: (j as f64 + 0.5) * h,
            };
            let r = phi.eval(&p) - sol.interpolate(&a.apply(&p)) + sol.interpolate(&p) - sol.constant;
            sup = sup.max(r.abs());
        }
    }
    sup
}

/// Alternative su-paths from `anchor` to `y`: other lattice translates of
/// the bracket, then detours through pseudorandom intermediate points.
pub fn alternate_paths(
    a: &HyperbolicAutomorphism,
    anchor: &TorusPoint,
    y: &TorusPoint,
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<SuPath>> {
    let cands = bracket_candidates(a, anchor, y, radius)?;
    let mut out: Vec<SuPath> = cands.iter().skip(1).take(count.div_ceil(2)).map(|b| b.path()).collect();
    let mut rng = seeded(seed);
    while out.len() < count {
        let z = TorusPoint {
            x1: rng.random::<f64>(),
            x2: rng.random::<f64>(),
        };
        let first = su_path(a, anchor, &z, radius)?;
        let second = su_path(a, &z, y, radius)?;
        out.push(first.then(&second)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub spread: f64,
    pub nodes_checked: usize,
    /// Certified error of the spread computation.
    pub error_bound: f64,
    /// Closed cycle (primary path followed by a reversed alternate) with the
    /// largest disagreement.
    pub worst_cycle: Option<AccessibleCycle>,
}

/// Spread of Phi values over alternative paths at a pseudorandom sample of
/// grid nodes: max over nodes of (max - min).
pub fn consistency_check(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    sol: &TransferSolution,
    n_alternates: usize,
    tol: f64,
    seed: u64,
) -> Result<ConsistencyReport> {
    let centered = phi.centered();
    let n = sol.grid_n;
    let mut rng = seeded(seed);
    let total = n * n;
    let sample = total.min(64);
    let nodes: Vec<usize> = if sample == total {
        (0..total).collect()
    } else {
        (0..sample).map(|_| rng.random_range(0..total)).collect()
    };
    let mut report = ConsistencyReport {
        spread: 0.0,
        nodes_checked: nodes.len(),
        error_bound: 0.0,
        worst_cycle: None,
    };
    let mut worst = -1.0;
    for (k, &idx) in nodes.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let y = sol.node(i, j);
        let primary = su_path(a, &sol.anchor, &y, DEFAULT_BRACKET_RADIUS)?;
        let base_val = sol.values[idx];
        let (mut lo, mut hi) = (base_val, base_val);
        let mut err = sol.errors[idx];
        let alts = alternate_paths(a, &sol.anchor, &y, n_alternates, DEFAULT_BRACKET_RADIUS, seed ^ (k as u64 + 1))?;
        for alt in alts {
            let p = pcf_path(&centered, a, &alt, tol)?;
            let v = -p.value;
            err = err.max(p.error_bound);
            if (v - base_val).abs() > worst {
                worst = (v - base_val).abs();
                let cycle = primary.then(&alt.reversed())?;
                report.worst_cycle = Some(AccessibleCycle { path: cycle });
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let spread = hi - lo;
        if spread > report.spread {
            report.spread = spread;
        }
        report.error_bound = report.error_bound.max(2.0 * err);
    }
    Ok(report)
}

/// Averaged increment along the path family alpha_i: with legs of the
/// su-path x0 -> x1 scaled by i, beta_i is the fiber increment of alpha_i.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingEstimate {
    /// Fiber increment of the single path x0 -> x1.
    pub direct: f64,
    /// (1/n) sum_{i=1..n} (beta_i(x0) - beta_i(x1)).
    pub averaged: f64,
    /// Phi(x_{n+1}) - Phi(x_1), the exact discrepancy times n.
    pub endpoint_term: f64,
    pub n: usize,
    pub error_bound: f64,
}

fn scaled_path(a: &HyperbolicAutomorphism, start: &TorusPoint, legs: &[SuLeg], scale: f64) -> SuPath {
    let mut p = *start;
    let mut out = Vec::with_capacity(legs.len());
    for l in legs {
        let leg = SuLeg::new(a, l.kind, p, l.displacement * scale);
        p = leg.end;
        out.push(leg);
    }
    SuPath { anchor: *start, legs: out }
}

pub fn averaged_increment(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    x0: &TorusPoint,
    x1: &TorusPoint,
    n: usize,
    tol: f64,
) -> Result<AveragingEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let centered = phi.centered();
    let base = su_path(a, x0, x1, DEFAULT_BRACKET_RADIUS)?;
    let beta = |z: &TorusPoint, i: usize| -> Result<(f64, f64)> {
        let p = pcf_path(&centered, a, &scaled_path(a, z, &base.legs, i as f64), tol)?;
        Ok((-p.value, p.error_bound))
    };
    let (direct, mut err) = beta(x0, 1)?;
    let mut acc = 0.0;
    for i in 1..=n {
        let (b0, e0) = beta(x0, i)?;
        let (b1, e1) = beta(x1, i)?;
        acc += b0 - b1;
        err = err.max(e0 + e1);
    }
    // x_{n+1} - x_1 along the path family is the path x1 -> x_{n+1}
    let (end_term, e_end) = beta(x1, n)?;
    Ok(AveragingEstimate {
        direct,
        averaged: acc / n as f64,
        endpoint_term: end_term,
        n,
        error_bound: err + e_end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub max_period: u32,
    pub grid_n: usize,
    pub tol: f64,
    pub n_alternates: usize,
    pub seed: u64,
    pub anchor: TorusPoint,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            max_period: 8,
            grid_n: 32,
            tol: 1e-10,
            n_alternates: 4,
            seed: 0,
            anchor: TorusPoint::origin(),
        }
    }
}

/// Periodic-orbit test first, then the grid solve with path consistency.
/// A `Coboundary` verdict means no obstruction was found at the tested scale.
pub fn classify(phi: &FourierCocycle, a: &HyperbolicAutomorphism, cfg: &ClassifyConfig) -> Result<Classification> {
    let witnesses = periodic_obstruction(phi, a, cfg.max_period)?;
    if let Some(w) = witnesses.into_iter().next() {
        return Ok(Classification::Obstructed(w));
    }
    let mut sol = solve_via_su_paths(phi, a, &cfg.anchor, cfg.grid_n, cfg.tol, DEFAULT_BRACKET_RADIUS)?;
    let rep = consistency_check(phi, a, &sol, cfg.n_alternates, cfg.tol, cfg.seed)?;
    sol.consistency_spread = Some(rep.spread);
    if rep.spread > rep.error_bound + WITNESS_MARGIN {
        if let Some(cycle) = rep.worst_cycle {
            return Ok(Classification::Obstructed(ObstructionWitness {
                kind: WitnessKind::AccessibleCycle(cycle),
                magnitude: rep.spread,
                certified_floor: rep.spread - rep.error_bound,
            }));
        }
    }
    Ok(Classification::Coboundary(sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_has_fixed_point_witness() {
        let a = HyperbolicAutomorphism::cat();
        let phi = FourierCocycle::from_modes(0.0, &[([1, 0], 1.0, 0.0)]);
        let w = periodic_obstruction(&phi, &a, 4).unwrap();
        let fixed = w
            .iter()
            .find(|w| matches!(&w.kind, WitnessKind::PeriodicOrbit(p) if p.len() == 1))
            .unwrap();
        assert!((fixed.magnitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_cocycle_is_trivial() {
        let a = HyperbolicAutomorphism::cat();
        let phi = FourierCocycle::constant(0.7);
        assert!(periodic_obstruction(&phi, &a, 6).unwrap().is_empty());
        let sol = solve_via_su_paths(&phi, &a, &TorusPoint::origin(), 4, 1e-10, 2.0).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
        assert!(sol.residual_sup < 1e-15);
    }

    #[test]
    fn anchor_value_zero() {
        let a = HyperbolicAutomorphism::cat();
        let psi = FourierCocycle::from_modes(0.0, &[([1, 1], 0.3, 0.2)]);
        let phi = FourierCocycle::coboundary_of(&psi, &a);
        let sol = solve_via_su_paths(&phi, &a, &TorusPoint::origin(), 8, 1e-11, 2.0).unwrap();
        assert!(sol.value(0, 0).abs() < 1e-11);
    }

    #[test]
    fn zero_grid_rejected() {
        let a = HyperbolicAutomorphism::cat();
        assert!(solve_via_su_paths(&FourierCocycle::zero(), &a, &TorusPoint::origin(), 0, 1e-10, 2.0).is_err());
    }
}
