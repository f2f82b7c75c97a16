//! Holder exponent estimation from (distance, increment) pairs by a
//! Theil-Sen fit in log-log coordinates.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::torus::TorusPoint;

pub const MIN_PAIRS: usize = 100;
const MAX_FIT_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub dist: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    pub alpha_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Pairs with a nonzero increment that entered the fit.
    pub pairs_used: usize,
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let hi = *m;
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Slope of log delta against log dist. Pairs with zero increment are
/// dropped; if nothing remains the exponent is undefined.
pub fn holder_exponent_estimate(pairs: &[Pair]) -> Result<HolderEstimate> {
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InsufficientSamples {
            needed: MIN_PAIRS,
            got: pairs.len(),
        });
    }
    let mut pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.dist > 0.0 && p.delta > 0.0 && p.delta.is_finite())
        .map(|p| (p.dist.ln(), p.delta.ln()))
        .collect();
    if pts.is_empty() {
        return Err(Error::ExponentUndefined);
    }
    if pts.len() > MAX_FIT_POINTS {
        let step = pts.len() as f64 / MAX_FIT_POINTS as f64;
        pts = (0..MAX_FIT_POINTS).map(|i| pts[(i as f64 * step) as usize]).collect();
    }
    let mut slopes = Vec::with_capacity(pts.len() * (pts.len() - 1) / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = pts[j].0 - pts[i].0;
            if dx.abs() > 1e-9 {
                slopes.push((pts[j].1 - pts[i].1) / dx);
            }
        }
    }
    if slopes.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: MIN_PAIRS,
            got: 0,
        });
    }
    let slope = median(&mut slopes);
    let mut res: Vec<f64> = pts.iter().map(|p| p.1 - slope * p.0).collect();
    let intercept = median(&mut res);
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(HolderEstimate {
        alpha_hat: slope,
        intercept,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        pairs_used: pts.len(),
    })
}

/// Pairs (x, x + d) with x uniform in [a, b - d] and d log-uniform in
/// [d_min, d_max].
pub fn sample_pairs_1d(f: &dyn Fn(f64) -> f64, domain: (f64, f64), d_range: (f64, f64), count: usize, seed: u64) -> Vec<Pair> {
    let mut rng = seeded(seed);
    let (lo, hi) = (d_range.0.ln(), d_range.1.ln());
    (0..count)
        .map(|_| {
            let d = rng.random_range(lo..=hi).exp();
            let x = rng.random_range(domain.0..(domain.1 - d).max(domain.0 + f64::MIN_POSITIVE));
            Pair {
                dist: d,
                delta: (f(x + d) - f(x)).abs(),
            }
        })
        .collect()
}

/// Pairs on T^2 with displacement of log-uniform length in a uniform
/// direction.
pub fn sample_pairs_torus(f: &dyn Fn(&TorusPoint) -> f64, d_range: (f64, f64), count: usize, seed: u64) -> Vec<Pair> {
    let mut rng = seeded(seed);
    let (lo, hi) = (d_range.0.ln(), d_range.1.ln());
    (0..count)
        .map(|_| {
            let p = TorusPoint {
                x1: rng.random::<f64>(),
                x2: rng.random::<f64>(),
            };
            let d = rng.random_range(lo..=hi).exp();
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            let q = p.shifted([d * th.cos(), d * th.sin()]);
            Pair {
                dist: d,
                delta: (f(&q) - f(&p)).abs(),
            }
        })
        .collect()
}

/// Pairs of nodes of a periodic n x n grid (row-major values) at offsets of
/// up to `max_offset` cells.
pub fn sample_pairs_grid(values: &[f64], n: usize, max_offset: usize, count: usize, seed: u64) -> Vec<Pair> {
    let mut rng = seeded(seed);
    let h = 1.0 / n as f64;
    let m = max_offset.max(1) as i64;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let (di, dj) = (rng.random_range(-m..=m), rng.random_range(-m..=m));
        if di == 0 && dj == 0 {
            continue;
        }
        let i2 = (i as i64 + di).rem_euclid(n as i64) as usize;
        let j2 = (j as i64 + dj).rem_euclid(n as i64) as usize;
        out.push(Pair {
            dist: h * ((di * di + dj * dj) as f64).sqrt(),
            delta: (values[i * n + j] - values[i2 * n + j2]).abs(),
        });
    }
    out
}

/// Weierstrass-type function sum_{k<=terms} 2^-k cos(2 pi 3^k x); its Holder
/// exponent is log 2 / log 3.
pub fn weierstrass(x: f64, terms: u32) -> f64 {
    let mut s = 0.0;
    let mut a = 1.0;
    let mut b = 1.0f64;
    for _ in 0..=terms {
        let ph = b * x;
        s += a * (std::f64::consts::TAU * (ph - ph.floor())).cos();
        a *= 0.5;
        b *= 3.0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_exponent_one() {
        let pairs = sample_pairs_1d(&|x| 3.0 * x, (0.0, 1.0), (1e-6, 1e-1), 500, 3);
        let e = holder_exponent_estimate(&pairs).unwrap();
        assert!((e.alpha_hat - 1.0).abs() < 1e-6);
        assert!(e.r_squared > 0.999);
    }

    #[test]
    fn constant_is_flagged() {
        let pairs = sample_pairs_1d(&|_| 1.0, (0.0, 1.0), (1e-6, 1e-1), 500, 3);
        assert_eq!(holder_exponent_estimate(&pairs), Err(Error::ExponentUndefined));
    }

    #[test]
    fn too_few_pairs() {
        let pairs = sample_pairs_1d(&|x| x, (0.0, 1.0), (1e-6, 1e-1), 99, 3);
        assert!(matches!(holder_exponent_estimate(&pairs), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn sqrt_exponent_half() {
        let pairs = sample_pairs_1d(&|x: f64| x.abs().sqrt(), (-1.0, 1.0), (1e-8, 1e-2), 1000, 5);
        let e = holder_exponent_estimate(&pairs).unwrap();
        // sqrt is Lipschitz away from 0, so the typical pair sees exponent 1;
        // the estimator reports the bulk behaviour
        assert!(e.alpha_hat > 0.5 - 0.05);
    }
}
