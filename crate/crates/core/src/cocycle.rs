//! Real trigonometric polynomials on T^2.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::torus::{HyperbolicAutomorphism, PeriodicOrbit, TorusPoint};

pub type Frequency = [i64; 2];

/// Supremum of the distance between two points of T^2.
pub const TORUS_DIAMETER: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// mean + sum_k a_k cos(2 pi k.x) + b_k sin(2 pi k.x), with frequencies kept
/// in the half-plane k1 > 0 or (k1 = 0, k2 > 0).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierCocycle {
    mean: f64,
    modes: BTreeMap<Frequency, (f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityBound {
    pub alpha: f64,
    pub holder_constant: f64,
    pub lipschitz: f64,
}

fn canonical(k: Frequency) -> (Frequency, f64) {
    if k[0] > 0 || (k[0] == 0 && k[1] > 0) {
        (k, 1.0)
    } else {
        ([-k[0], -k[1]], -1.0)
    }
}

impl FourierCocycle {
    pub fn constant(mean: f64) -> Self {
        FourierCocycle {
            mean,
            modes: BTreeMap::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Build from (frequency, cos coefficient, sin coefficient) triples.
    pub fn from_modes(mean: f64, modes: &[(Frequency, f64, f64)]) -> Self {
        let mut c = Self::constant(mean);
        for &(k, a, b) in modes {
            c.add_mode(k, a, b);
        }
        c
    }

    pub fn add_mode(&mut self, k: Frequency, a: f64, b: f64) {
        if k == [0, 0] {
            self.mean += a;
            return;
        }
        let (k, sign) = canonical(k);
        let e = self.modes.entry(k).or_insert((0.0, 0.0));
        e.0 += a;
        e.1 += sign * b;
        if e.0 == 0.0 && e.1 == 0.0 {
            self.modes.remove(&k);
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn modes(&self) -> impl Iterator<Item = (Frequency, f64, f64)> + '_ {
        self.modes.iter().map(|(k, &(a, b))| (*k, a, b))
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn eval(&self, p: &TorusPoint) -> f64 {
        self.eval_lift([p.x1, p.x2])
    }

    /// Evaluation at a point of R^2 (the function is Z^2-periodic).
    pub fn eval_lift(&self, x: [f64; 2]) -> f64 {
        let mut s = self.mean;
        for (k, &(a, b)) in &self.modes {
            let ph = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            let th = TAU * (ph - ph.floor());
            let (sn, cs) = th.sin_cos();
            s += a * cs + b * sn;
        }
        s
    }

    /// Directional derivative along `v` of order `order`.
    pub fn directional_derivative(&self, x: [f64; 2], v: [f64; 2], order: u32) -> f64 {
        let mut s = if order == 0 { self.mean } else { 0.0 };
        for (k, &(a, b)) in &self.modes {
            let w = TAU * (k[0] as f64 * v[0] + k[1] as f64 * v[1]);
            let ph = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            let th = TAU * (ph - ph.floor()) + order as f64 * std::f64::consts::FRAC_PI_2;
            let (sn, cs) = th.sin_cos();
            s += w.powi(order as i32) * (a * cs + b * sn);
        }
        s
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.derivative_bound(1)
    }

    /// Bound on the sup norm of all partial derivatives of total order `j`
    /// contracted with unit vectors: sum (2 pi |k|)^j (|a| + |b|).
    pub fn derivative_bound(&self, j: u32) -> f64 {
        let mut s = if j == 0 { self.mean.abs() } else { 0.0 };
        for (k, &(a, b)) in &self.modes {
            let n = (k[0] as f64).hypot(k[1] as f64);
            s += (TAU * n).powi(j as i32) * (a.abs() + b.abs());
        }
        s
    }

    /// Bound on |phi(v)| for an order-j directional derivative along `v`.
    pub fn directional_bound(&self, v: [f64; 2], j: u32) -> f64 {
        let mut s = if j == 0 { self.mean.abs() } else { 0.0 };
        for (k, &(a, b)) in &self.modes {
            let w = TAU * (k[0] as f64 * v[0] + k[1] as f64 * v[1]);
            s += w.abs().powi(j as i32) * (a.abs() + b.abs());
        }
        s
    }

    pub fn sup_bound(&self) -> f64 {
        self.derivative_bound(0)
    }

    pub fn holder_bound(&self, alpha: f64) -> Result<RegularityBound> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} not in (0, 1]")));
        }
        let lip = self.lipschitz_bound();
        Ok(RegularityBound {
            alpha,
            holder_constant: lip * TORUS_DIAMETER.powf(1.0 - alpha),
            lipschitz: lip,
        })
    }

    /// phi o A: the mode k becomes A^T k.
    pub fn compose_with(&self, a: &HyperbolicAutomorphism) -> Self {
        let m = a.matrix();
        let mut out = Self::constant(self.mean);
        for (k, &(ca, cb)) in &self.modes {
            let kt = [
                m[0][0] * k[0] + m[1][0] * k[1],
                m[0][1] * k[0] + m[1][1] * k[1],
            ];
            out.add_mode(kt, ca, cb);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.mean *= c;
        for v in out.modes.values_mut() {
            v.0 *= c;
            v.1 *= c;
        }
        out.modes.retain(|_, v| v.0 != 0.0 || v.1 != 0.0);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.mean += other.mean;
        for (k, &(a, b)) in &other.modes {
            out.add_mode(*k, a, b);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Same function with the mean removed.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        out.mean = 0.0;
        out
    }

    /// Psi o A - Psi.
    pub fn coboundary_of(psi: &Self, a: &HyperbolicAutomorphism) -> Self {
        psi.compose_with(a).sub(psi)
    }

    /// Random trigonometric polynomial with `count` modes, frequencies in
    /// [-max_freq, max_freq]^2 and coefficients uniform in [-amp, amp].
    pub fn random(rng: &mut Rng, count: usize, max_freq: i64, amp: f64) -> Self {
        let mut c = Self::zero();
        while c.mode_count() < count {
            let k = [
                rng.random_range(-max_freq..=max_freq),
                rng.random_range(-max_freq..=max_freq),
            ];
            if k == [0, 0] {
                continue;
            }
            let a = rng.random_range(-amp..=amp);
            let b = rng.random_range(-amp..=amp);
            c.add_mode(k, a, b);
        }
        c
    }

    /// Text literal: `mean m` and `k1 k2 a b` lines, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::zero();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "mean" {
                if toks.len() != 2 {
                    return Err(err("expected `mean <value>`"));
                }
                let m: f64 = toks[1].parse().map_err(|_| err("bad mean value"))?;
                if !m.is_finite() {
                    return Err(err("mean is not finite"));
                }
                c.mean += m;
                continue;
            }
            if toks.len() != 4 {
                return Err(err("expected `k1 k2 a b`"));
            }
            let k1: i64 = toks[0].parse().map_err(|_| err("bad frequency"))?;
            let k2: i64 = toks[1].parse().map_err(|_| err("bad frequency"))?;
            let a: f64 = toks[2].parse().map_err(|_| err("bad coefficient"))?;
            let b: f64 = toks[3].parse().map_err(|_| err("bad coefficient"))?;
            if !a.is_finite() || !b.is_finite() {
                return Err(err("coefficient is not finite"));
            }
            c.add_mode([k1, k2], a, b);
        }
        Ok(c)
    }

    pub fn to_literal(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mean {:?}", self.mean).unwrap();
        for (k, &(a, b)) in &self.modes {
            writeln!(s, "{} {} {:?} {:?}", k[0], k[1], a, b).unwrap();
        }
        s
    }

    /// sum_{i<n} phi(A^i x), iterating the base map in floating point.
    pub fn birkhoff_sum(&self, a: &HyperbolicAutomorphism, x: &TorusPoint, n: usize) -> f64 {
        let mut p = *x;
        let mut s = 0.0;
        for _ in 0..n {
            s += self.eval(&p);
            p = a.apply(&p);
        }
        s
    }

    /// Birkhoff sum along an exact periodic orbit.
    pub fn orbit_sum(&self, orbit: &PeriodicOrbit) -> f64 {
        orbit.points.iter().map(|p| self.eval(&p.to_torus())).sum()
    }
}
