//! Weighted least-squares fit of a local polynomial expansion
//! psi(z') = P(z' - z) + O(|z' - z|^(l+alpha)).

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph_transform::MonomialBasis;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionConfig {
    pub outer_radius: f64,
    pub shells: usize,
    /// Radius of shell s is outer_radius * shell_ratio^s.
    pub shell_ratio: f64,
    pub directions: usize,
    pub ceiling: f64,
    pub seed: u64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            outer_radius: 0.1,
            shells: 24,
            shell_ratio: 0.5,
            directions: 12,
            ceiling: 10.0,
            seed: 0,
        }
    }
}

impl ExpansionConfig {
    /// Shell geometry reaching down to `inner_radius`.
    pub fn with_range(outer_radius: f64, inner_radius: f64, shells: usize) -> Self {
        let shell_ratio = (inner_radius / outer_radius).powf(1.0 / (shells.max(2) - 1) as f64);
        ExpansionConfig {
            outer_radius,
            shells,
            shell_ratio,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub ell: u32,
    pub alpha: f64,
    /// Coefficients on the graded monomial basis in the displacement z' - z.
    pub coeffs: Vec<f64>,
    pub exponents: Vec<Vec<u32>>,
    /// max |psi(z') - P(z' - z)| / |z' - z|^(l+alpha)
    pub constant: f64,
    /// (shell radius, max ratio in shell)
    pub shell_ratios: Vec<(f64, f64)>,
    /// Slope of log(shell ratio) against log(radius); negative means growth
    /// towards the centre.
    pub growth_slope: f64,
    pub admits: bool,
}

impl ExpansionFit {
    pub fn coeff(&self, e: &[u32]) -> f64 {
        self.exponents.iter().position(|x| x == e).map(|i| self.coeffs[i]).unwrap_or(0.0)
    }
}

/// Points z + rho_s u on geometric shells; in the plane the directions are
/// evenly spaced and rotated from shell to shell.
pub fn expansion_samples(center: &[f64], cfg: &ExpansionConfig) -> Vec<Vec<f64>> {
    let d = center.len();
    let mut rng = seeded(cfg.seed);
    let mut out = Vec::with_capacity(cfg.shells * cfg.directions);
    for s in 0..cfg.shells {
        let rho = cfg.outer_radius * cfg.shell_ratio.powi(s as i32);
        for k in 0..cfg.directions {
            let u: Vec<f64> = if d == 1 {
                vec![if k % 2 == 0 { 1.0 } else { -1.0 }]
            } else if d == 2 {
                let th = std::f64::consts::TAU * (k as f64 + 0.618_033_988_75 * s as f64) / cfg.directions as f64;
                vec![th.cos(), th.sin()]
            } else {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / n).collect()
            };
            out.push(center.iter().zip(&u).map(|(c, ui)| c + rho * ui).collect());
        }
    }
    out
}

fn monomial(e: &[u32], x: &[f64]) -> f64 {
    e.iter().zip(x).map(|(p, v)| v.powi(*p as i32)).product()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Fit P from samples (z', psi(z')) with weights |z' - z|^-(l+alpha).
pub fn expansion_fit_samples(
    samples: &[(Vec<f64>, f64)],
    center: &[f64],
    ell: u32,
    alpha: f64,
    ceiling: f64,
) -> Result<ExpansionFit> {
    let d = center.len();
    let basis = MonomialBasis::new(d, ell);
    let nb = basis.len();
    let needed = binomial(ell as usize + d, d);
    let rows: Vec<(Vec<f64>, f64, f64)> = samples
        .iter()
        .filter_map(|(z, v)| {
            let delta: Vec<f64> = z.iter().zip(center).map(|(a, b)| a - b).collect();
            let dist = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
            (dist > 0.0).then_some((delta, dist, *v))
        })
        .collect();
    if rows.len() < needed {
        return Err(Error::InsufficientSamples { needed, got: rows.len() });
    }
    let order = ell as f64 + alpha;
    let mut a = DMatrix::from_fn(rows.len(), nb, |i, k| monomial(&basis.exponents()[k], &rows[i].0) * rows[i].1.powf(-order));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2 * r.1.powf(-order)));
    let scales: Vec<f64> = (0..nb).map(|k| a.column(k).amax().max(f64::MIN_POSITIVE)).collect();
    for (k, s) in scales.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::GridDegenerate("sample geometry does not determine the expansion".into()));
    }
    let sol = svd.solve(&b, 0.0).map_err(|_| Error::Singular)?;
    let coeffs: Vec<f64> = (0..nb).map(|k| sol[k] / scales[k]).collect();
    let exponents = basis.exponents().to_vec();
    let mut shells: Vec<(f64, f64)> = Vec::new();
    let mut constant = 0.0f64;
    for (delta, dist, v) in &rows {
        let p: f64 = exponents.iter().zip(&coeffs).map(|(e, c)| c * monomial(e, delta)).sum();
        let ratio = (v - p).abs() / dist.powf(order);
        constant = constant.max(ratio);
        match shells.iter_mut().find(|s| (s.0 - dist).abs() <= 1e-12 * dist) {
            Some(s) => s.1 = s.1.max(ratio),
            None => shells.push((*dist, ratio)),
        }
    }
    let pts: Vec<(f64, f64)> = shells.iter().filter(|s| s.1 > 0.0).map(|s| (s.0.ln(), s.1.ln())).collect();
    let growth_slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(ExpansionFit {
        ell,
        alpha,
        coeffs,
        exponents,
        constant,
        shell_ratios: shells,
        growth_slope,
        admits: constant <= ceiling,
    })
}

pub fn expansion_fit(psi: &dyn Fn(&[f64]) -> f64, center: &[f64], ell: u32, alpha: f64, cfg: &ExpansionConfig) -> Result<ExpansionFit> {
    let samples: Vec<(Vec<f64>, f64)> = expansion_samples(center, cfg)
        .into_iter()
        .map(|z| {
            let v = psi(&z);
            (z, v)
        })
        .collect();
    expansion_fit_samples(&samples, center, ell, alpha, cfg.ceiling)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial() {
        let f = |z: &[f64]| 2.0 + z[0] - 3.0 * z[1] + 0.5 * z[0] * z[1];
        let fit = expansion_fit(&f, &[0.2, 0.3], 2, 0.5, &ExpansionConfig::with_range(0.1, 1e-3, 10)).unwrap();
        assert!((fit.coeff(&[1, 1]) - 0.5).abs() < 1e-8);
        assert!((fit.coeff(&[0, 0]) - (2.0 + 0.2 - 0.9 + 0.03)).abs() < 1e-10);
        assert!(fit.admits);
    }

    #[test]
    fn too_few_samples() {
        let samples = vec![(vec![0.1, 0.0], 1.0), (vec![0.0, 0.1], 1.0)];
        assert!(matches!(
            expansion_fit_samples(&samples, &[0.0, 0.0], 2, 0.5, 10.0),
            Err(Error::InsufficientSamples { needed: 6, got: 2 })
        ));
    }

    #[test]
    fn collinear_samples_degenerate() {
        let samples: Vec<(Vec<f64>, f64)> = (1..20).map(|i| (vec![i as f64 * 0.01, 0.0], 1.0)).collect();
        assert!(matches!(
            expansion_fit_samples(&samples, &[0.0, 0.0], 1, 0.5, 10.0),
            Err(Error::GridDegenerate(_))
        ));
    }
}
