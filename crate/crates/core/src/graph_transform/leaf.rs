//! Graph transform on a local unstable leaf through a fixed point.

use crate::cocycle::FourierCocycle;
use crate::error::{Error, Result};
use crate::torus::{HyperbolicAutomorphism, TorusPoint};

/// Natural cubic spline through uniformly spaced samples.
#[derive(Debug, Clone)]
pub struct UniformSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl UniformSpline {
    pub fn new(x0: f64, h: f64, y: &[f64]) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n >= 3 {
            // tridiagonal system for second derivatives, natural ends
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            for i in 0..k {
                let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
                let (prev_c, prev_d) = if i == 0 { (0.0, 0.0) } else { (c[i - 1], d[i - 1]) };
                let denom = 4.0 - prev_c;
                c[i] = 1.0 / denom;
                d[i] = (rhs - prev_d) / denom;
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { m[i + 2] } else { 0.0 };
                m[i + 1] = d[i] - c[i] * next;
            }
        }
        UniformSpline { x0, h, y: y.to_vec(), m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        if n == 1 {
            return self.y[0];
        }
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let h2 = self.h * self.h;
        let a = 1.0 - t;
        a * self.y[i] + t * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (t * t * t - t) * self.m[i + 1]) * h2 / 6.0
    }
}

/// Samples g(u_j) of a graph over the local leaf base + u v_u, u in
/// [-radius, radius] on an odd number of uniform nodes (u = 0 is a node).
#[derive(Debug, Clone, PartialEq)]
pub struct LeafGraph {
    pub base: TorusPoint,
    pub radius: f64,
    pub samples: Vec<f64>,
}

impl LeafGraph {
    pub const DEFAULT_RADIUS: f64 = 0.5;
    pub const DEFAULT_INTERVALS: usize = 2048;

    pub fn new(base: TorusPoint, radius: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 3 || samples.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("need an odd number (>= 3) of samples".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        Ok(LeafGraph { base, radius, samples })
    }

    pub fn from_fn(base: TorusPoint, radius: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 2.0 * radius / intervals as f64;
        let samples = (0..=intervals).map(|j| f(-radius + j as f64 * h)).collect();
        Self::new(base, radius, samples)
    }

    pub fn zero(base: TorusPoint, radius: f64, intervals: usize) -> Result<Self> {
        Self::from_fn(base, radius, intervals, |_| 0.0)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.samples.len() - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.radius + j as f64 * self.spacing()
    }

    pub fn spline(&self) -> UniformSpline {
        UniformSpline::new(-self.radius, self.spacing(), &self.samples)
    }

    pub fn sup_distance(&self, other: &LeafGraph) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// max over nodes u != 0 of |g(u) - g(0)| / |u|^alpha.
    pub fn alpha_norm(&self, alpha: f64) -> f64 {
        let c = self.samples.len() / 2;
        let g0 = self.samples[c];
        let mut best = 0.0f64;
        for (j, g) in self.samples.iter().enumerate() {
            if j == c {
                continue;
            }
            best = best.max((g - g0).abs() / self.node(j).abs().powf(alpha));
        }
        best
    }

    pub fn difference(&self, other: &LeafGraph) -> LeafGraph {
        LeafGraph {
            base: self.base,
            radius: self.radius,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        }
    }
}

fn check_fixed_base(a: &HyperbolicAutomorphism, base: &TorusPoint) -> Result<()> {
    let drift = a.apply(base).distance(base);
    if drift > 1e-12 {
        return Err(Error::InvalidBase(drift));
    }
    Ok(())
}

/// T(g)(u) = g(u / lambda_u) + phi(base + (u / lambda_u) v_u) - phi(base).
pub fn graph_transform_step(phi: &FourierCocycle, a: &HyperbolicAutomorphism, g: &LeafGraph) -> Result<LeafGraph> {
    check_fixed_base(a, &g.base)?;
    let sp = g.spline();
    let l = a.lambda_u();
    let v = a.v_u();
    let b = g.base.lift();
    let phi_b = phi.eval(&g.base);
    let samples = (0..g.samples.len())
        .map(|j| {
            let w = g.node(j) / l;
            sp.eval(w) + phi.eval_lift([b[0] + w * v[0], b[1] + w * v[1]]) - phi_b
        })
        .collect();
    Ok(LeafGraph {
        base: g.base,
        radius: g.radius,
        samples,
    })
}

#[derive(Debug, Clone)]
pub struct FixedPointRun {
    pub graph: LeafGraph,
    pub iterations: usize,
    pub distances: Vec<f64>,
    /// Geometric mean of successive distance ratios above the noise floor.
    pub rate_estimate: Option<f64>,
    pub converged: bool,
}

pub fn iterate_to_fixed_point(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    g0: &LeafGraph,
    max_iter: usize,
    tol: f64,
) -> Result<FixedPointRun> {
    let mut g = g0.clone();
    let mut distances = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for k in 0..=max_iter {
        let next = graph_transform_step(phi, a, &g)?;
        let d = next.sup_distance(&g);
        if d <= tol {
            converged = true;
            iterations = k;
            if k > 0 {
                distances.push(d);
                g = next;
            }
            break;
        }
        distances.push(d);
        g = next;
        iterations = k + 1;
    }
    let scale = g.samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let floor = 1e4 * f64::EPSILON * scale;
    let ratios: Vec<f64> = distances
        .windows(2)
        .filter(|w| w[1] > floor && w[0] > floor)
        .map(|w| (w[1] / w[0]).ln())
        .collect();
    let rate_estimate = if ratios.is_empty() {
        None
    } else {
        Some((ratios.iter().sum::<f64>() / ratios.len() as f64).exp())
    };
    Ok(FixedPointRun {
        graph: g,
        iterations,
        distances,
        rate_estimate,
        converged,
    })
}

/// Accumulated spline error bound after `iterations` steps:
/// (iterations + 1) * 2 * (5/384) h^4 M4, where M4 bounds the fourth
/// derivative of every iterate along the leaf.
pub fn interpolation_error_bound(phi: &FourierCocycle, a: &HyperbolicAutomorphism, g: &LeafGraph, iterations: usize) -> f64 {
    let q = a.lambda_u().abs().powi(-4);
    let m4 = phi.directional_bound(a.v_u(), 4) * q / (1.0 - q);
    let h = g.spacing();
    (iterations as f64 + 1.0) * 2.0 * (5.0 / 384.0) * h.powi(4) * m4
}
