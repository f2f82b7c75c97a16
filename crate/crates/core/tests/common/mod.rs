//! Independent oracles shared by the integration tests and the acceptance
//! harness.
#![allow(dead_code)]

use std::f64::consts::TAU;

use livsic::cocycle::FourierCocycle;
use livsic::rng::Rng;
use livsic::torus::{AccessibleCycle, HyperbolicAutomorphism, LegKind, TorusPoint};
use rand::Rng as _;

/// A point num/den of the torus, kept exact for the oracle.
#[derive(Debug, Clone, Copy)]
pub struct Exact {
    pub num: [i128; 2],
    pub den: i128,
}

impl Exact {
    pub fn random(rng: &mut Rng) -> Self {
        let den = 1_000_003;
        Exact {
            num: [rng.random_range(0..den), rng.random_range(0..den)],
            den,
        }
    }

    /// Nearest point with denominator 2^50.
    pub fn approx(p: &TorusPoint) -> Self {
        let den = 1i128 << 50;
        let f = |x: f64| ((x * den as f64).round() as i128).rem_euclid(den);
        Exact {
            num: [f(p.x1), f(p.x2)],
            den,
        }
    }

    pub fn point(&self) -> TorusPoint {
        TorusPoint::new(self.num[0] as f64 / self.den as f64, self.num[1] as f64 / self.den as f64).unwrap()
    }

    /// Fractional part of k . x, exact up to the final division.
    fn phase(&self, k: [i128; 2]) -> f64 {
        (k[0] * self.num[0] + k[1] * self.num[1]).rem_euclid(self.den) as f64 / self.den as f64
    }
}

fn mat_t(m: [[i64; 2]; 2]) -> [[i128; 2]; 2] {
    [[m[0][0] as i128, m[1][0] as i128], [m[0][1] as i128, m[1][1] as i128]]
}

fn apply_mod(m: &[[i128; 2]; 2], k: [i128; 2], den: i128) -> [i128; 2] {
    [
        (m[0][0] * k[0] + m[0][1] * k[1]).rem_euclid(den),
        (m[1][0] * k[0] + m[1][1] * k[1]).rem_euclid(den),
    ]
}

#[allow(clippy::too_many_arguments)]
/// Sum over first <= i < first + terms of phi(M^i x + d mu^i v) - phi(M^i x),
/// computed per Fourier mode from k . M^i x = (M^T)^i k . x with exact
/// integer frequencies and M^i v = mu^i v.
fn mode_series(phi: &FourierCocycle, m: [[i64; 2]; 2], x: &Exact, v: [f64; 2], mu: f64, d: f64, first: u32, terms: u32) -> f64 {
    let mt = mat_t(m);
    let mut total = 0.0;
    for (k, a, b) in phi.modes() {
        let kv = k[0] as f64 * v[0] + k[1] as f64 * v[1];
        let mut ki = [(k[0] as i128).rem_euclid(x.den), (k[1] as i128).rem_euclid(x.den)];
        let mut shift = d * kv;
        for _ in 0..first {
            ki = apply_mod(&mt, ki, x.den);
            shift *= mu;
        }
        for _ in 0..terms {
            let th = x.phase(ki);
            let (s0, c0) = (TAU * th).sin_cos();
            let (s1, c1) = (TAU * (th + shift)).sin_cos();
            total += a * (c1 - c0) + b * (s1 - s0);
            ki = apply_mod(&mt, ki, x.den);
            shift *= mu;
        }
    }
    total
}

/// Stable-leg functional from x to x + d v_s by direct summation.
pub fn oracle_stable(phi: &FourierCocycle, a: &HyperbolicAutomorphism, x: &Exact, d: f64) -> f64 {
    mode_series(phi, a.matrix(), x, a.v_s(), a.lambda_s(), d, 0, 200)
}

/// Unstable-leg functional from x to x + d v_u by direct summation.
pub fn oracle_unstable(phi: &FourierCocycle, a: &HyperbolicAutomorphism, x: &Exact, d: f64) -> f64 {
    -mode_series(phi, a.inverse_matrix(), x, a.v_u(), 1.0 / a.lambda_u(), d, 1, 200)
}

/// Cycle functional by direct summation along each leg, started from the
/// rounded leg start points.
pub fn oracle_cycle(phi: &FourierCocycle, a: &HyperbolicAutomorphism, c: &AccessibleCycle) -> f64 {
    c.path
        .legs
        .iter()
        .map(|leg| {
            let x = Exact::approx(&leg.start);
            match leg.kind {
                LegKind::Stable => oracle_stable(phi, a, &x, leg.displacement),
                LegKind::Unstable => oracle_unstable(phi, a, &x, leg.displacement),
            }
        })
        .sum()
}

/// Random trigonometric polynomial with zero mean and `modes` modes of
/// frequency at most 2.
pub fn random_trig(rng: &mut Rng, modes: usize) -> FourierCocycle {
    FourierCocycle::random(rng, modes, 2, 1.0)
}

/// Brute-force fixed points of A^n as numerators over D = |det(A^n - I)|:
/// every j in [0, D)^2 with (A^n - I) j = 0 mod D.
pub fn brute_force_fixed_points(m: [[i64; 2]; 2], n: u32) -> Vec<[i64; 2]> {
    let mut p = [[1i128, 0], [0, 1]];
    for _ in 0..n {
        p = [
            [p[0][0] * m[0][0] as i128 + p[0][1] * m[1][0] as i128, p[0][0] * m[0][1] as i128 + p[0][1] * m[1][1] as i128],
            [p[1][0] * m[0][0] as i128 + p[1][1] * m[1][0] as i128, p[1][0] * m[0][1] as i128 + p[1][1] * m[1][1] as i128],
        ];
    }
    let b = [[p[0][0] - 1, p[0][1]], [p[1][0], p[1][1] - 1]];
    let d = (b[0][0] * b[1][1] - b[0][1] * b[1][0]).abs();
    let mut out = Vec::new();
    for j1 in 0..d {
        for j2 in 0..d {
            if (b[0][0] * j1 + b[0][1] * j2) % d == 0 && (b[1][0] * j1 + b[1][1] * j2) % d == 0 {
                out.push([j1 as i64, j2 as i64]);
            }
        }
    }
    out
}
