//! Interpolation grids cut out by transverse plaque families in R^2.
//!
//! Plaques are graphs: omega^H_z(x) = z + (x, beta^H_z(x)) and
//! omega^V_z(y) = z + (beta^V_z(y), y), with parameters in (-1, 1). The
//! horizontal and vertical plaques through the origin are the axes.

use super::interp::InterpolationGrid;
use crate::error::{Error, Result};

/// beta^H_z(x) = eps_h (z1 x + z2 x^2), beta^V_z(y) = eps_v (z2 y + z1 y^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaquePair {
    pub eps_h: f64,
    pub eps_v: f64,
}

impl PlaquePair {
    pub fn flat() -> Self {
        PlaquePair { eps_h: 0.0, eps_v: 0.0 }
    }

    pub fn curved(eps_h: f64, eps_v: f64) -> Self {
        PlaquePair { eps_h, eps_v }
    }

    /// Family with the roles of the two coordinates exchanged.
    pub fn swapped(&self) -> Self {
        PlaquePair {
            eps_h: self.eps_v,
            eps_v: self.eps_h,
        }
    }

    pub fn beta_h(&self, z: [f64; 2], x: f64) -> f64 {
        self.eps_h * (z[0] * x + z[1] * x * x)
    }

    pub fn beta_h_prime(&self, z: [f64; 2], x: f64) -> f64 {
        self.eps_h * (z[0] + 2.0 * z[1] * x)
    }

    pub fn beta_v(&self, z: [f64; 2], y: f64) -> f64 {
        self.eps_v * (z[1] * y + z[0] * y * y)
    }

    pub fn beta_v_prime(&self, z: [f64; 2], y: f64) -> f64 {
        self.eps_v * (z[1] + 2.0 * z[0] * y)
    }

    pub fn horizontal(&self, z: [f64; 2], x: f64) -> [f64; 2] {
        [z[0] + x, z[1] + self.beta_h(z, x)]
    }

    pub fn vertical(&self, z: [f64; 2], y: f64) -> [f64; 2] {
        [z[0] + self.beta_v(z, y), z[1] + y]
    }

    /// Max |beta_z(0)| and max |beta_0| on sample parameters; both vanish
    /// for a normalized family.
    pub fn normalization_defect(&self, samples: &[[f64; 2]]) -> f64 {
        let mut d = 0.0f64;
        for &z in samples {
            d = d.max(self.beta_h(z, 0.0).abs()).max(self.beta_v(z, 0.0).abs());
        }
        for &s in samples {
            d = d.max(self.beta_h([0.0, 0.0], s[0]).abs()).max(self.beta_v([0.0, 0.0], s[1]).abs());
        }
        d
    }

    /// F^V(a) intersected with F^H(b).
    pub fn intersect(&self, a: [f64; 2], b: [f64; 2]) -> Result<[f64; 2]> {
        // point a + (beta_v(s), s) lies on F^H(b) when
        // F(s) = a2 + s - b2 - beta_h(b, a1 + beta_v(a, s) - b1) = 0
        let t_of = |s: f64| a[0] + self.beta_v(a, s) - b[0];
        let f = |s: f64| a[1] + s - b[1] - self.beta_h(b, t_of(s));
        let df = |s: f64| 1.0 - self.beta_h_prime(b, t_of(s)) * self.beta_v_prime(a, s);
        let mut s = b[1] - a[1];
        let mut ok = false;
        for _ in 0..100 {
            let d = df(s);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = f(s) / d;
            s -= step;
            if step.abs() <= 1e-16 * (1.0 + s.abs()) {
                ok = true;
                break;
            }
        }
        if !ok && f(s).abs() > 1e-15 {
            s = bisect(&f, -1.0, 1.0)?;
        }
        let t = t_of(s);
        if s.abs() >= 1.0 || t.abs() >= 1.0 {
            return Err(Error::DomainExhausted);
        }
        Ok(self.vertical(a, s))
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::DomainExhausted);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    pub m: u32,
    pub j: u32,
    pub k: u32,
    pub grid: InterpolationGrid,
    pub r_m: f64,
    pub eta_m: f64,
    pub ratio: f64,
    /// 3 r^((m-1)/2)
    pub r_bound: f64,
    /// 6 r^(-(l+2))
    pub ratio_bound: f64,
    /// Index of the vertical plaque replaced by F^V(w), if it lies in S_m.
    pub substituted: Option<u32>,
}

impl GridSet {
    pub fn bounds_hold(&self) -> bool {
        self.r_m <= self.r_bound && self.ratio <= self.ratio_bound
    }
}

pub fn ratio_bound(r: f64, ell: usize) -> f64 {
    6.0 * r.powi(-(ell as i32 + 2))
}

/// Cone K_kappa = {(u, v) : |v| <= kappa |u|}.
pub fn in_cone(z: [f64; 2], kappa: f64) -> bool {
    z[1].abs() <= kappa * z[0].abs()
}

/// Index j >= 1 minimising |[w, 0] - r^j| together with the foot [w, 0].
pub fn substitution_index(plaques: &PlaquePair, w: [f64; 2], r: f64) -> Result<(u32, f64)> {
    let foot = plaques.intersect(w, [0.0, 0.0])?[0];
    if !(foot > 0.0) {
        return Err(Error::InvalidArgument("w must project to the positive horizontal axis".into()));
    }
    let mut best = (1u32, f64::INFINITY);
    for j in 1..200u32 {
        let d = (foot - r.powi(j as i32)).abs();
        if d < best.1 {
            best = (j, d);
        }
    }
    Ok((best.0, foot))
}

/// Grids S_m for m in `m_range`: S_2k = S_{k,k}, S_2k+1 = S_{k,k+1}, where
/// S_{j,k} collects the origin, the axis points and the intersections of
/// vertical plaques F^V_j..F^V_(j+l-1) with horizontal plaques
/// F^H_k..F^H_(k+l-1). With `w`, F^V_(j(w)) is replaced by F^V(w).
pub fn build_grids(
    plaques: &PlaquePair,
    r: f64,
    ell: usize,
    w: Option<[f64; 2]>,
    m_range: std::ops::RangeInclusive<u32>,
    kappa: f64,
) -> Result<Vec<GridSet>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument("r must lie in (0, 1)".into()));
    }
    if ell == 0 {
        return Err(Error::InvalidArgument("l must be positive".into()));
    }
    let sub = match w {
        Some(w) => {
            if !in_cone(w, kappa) {
                return Err(Error::InvalidArgument("w must lie in the cone".into()));
            }
            Some(substitution_index(plaques, w, r)?)
        }
        None => None,
    };
    let mut out = Vec::new();
    for m in m_range {
        if m < 2 {
            return Err(Error::InvalidArgument("grid index m must be >= 2".into()));
        }
        if r.powi(m as i32) < 1e-14 {
            return Err(Error::ResolutionExhausted(m));
        }
        let (j, k) = (m / 2, m / 2 + m % 2);
        let l = ell as u32;
        // vertical plaque base points and their feet on the horizontal axis
        let mut vbase: Vec<[f64; 2]> = Vec::with_capacity(ell);
        let mut xs = vec![0.0];
        let mut substituted = None;
        for jj in j..j + l {
            match sub {
                Some((jw, foot)) if jw == jj => {
                    vbase.push(w.unwrap());
                    xs.push(foot);
                    substituted = Some(jj);
                }
                _ => {
                    let x = r.powi(jj as i32);
                    vbase.push([x, 0.0]);
                    xs.push(x);
                }
            }
        }
        let mut ys = vec![0.0];
        let hbase: Vec<[f64; 2]> = (k..k + l)
            .map(|kk| {
                let y = r.powi(kk as i32);
                ys.push(y);
                [0.0, y]
            })
            .collect();
        let n = ell + 1;
        let mut points = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let p = match (a, b) {
                    (0, 0) => [0.0, 0.0],
                    (a, 0) => [xs[a], 0.0],
                    (0, b) => [0.0, ys[b]],
                    (a, b) => plaques.intersect(vbase[a - 1], hbase[b - 1])?,
                };
                points.push(p);
            }
        }
        let grid = InterpolationGrid::new(points, xs, ys)?;
        let (r_m, eta_m) = (grid.r(), grid.eta());
        if !(eta_m > 0.0) {
            return Err(Error::GridDegenerate(format!("S_{m} has coincident points")));
        }
        out.push(GridSet {
            m,
            j,
            k,
            r_m,
            eta_m,
            ratio: r_m / eta_m,
            r_bound: 3.0 * r.powf((m as f64 - 1.0) / 2.0),
            ratio_bound: ratio_bound(r, ell),
            substituted,
            grid,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_grid_ratio_closed_form() {
        let r = 0.5;
        for ell in 1..=3usize {
            let gs = build_grids(&PlaquePair::flat(), r, ell, None, 6..=6, 2.5).unwrap();
            let g = &gs[0];
            // S_{3,3}: nodes {0, r^3, .., r^(3+l-1)} on both axes
            let top = r.powi(3);
            let bottom = r.powi(3 + ell as i32 - 1);
            let gap = if ell == 1 { top } else { bottom.min(r.powi(3 + ell as i32 - 2) - bottom) };
            let expect = (2.0f64).sqrt() * top / gap;
            assert!((g.ratio - expect).abs() < 1e-9 * expect, "l={ell}");
            assert!(g.bounds_hold());
        }
    }

    #[test]
    fn intersection_lies_on_both_plaques() {
        let p = PlaquePair::curved(0.3, -0.2);
        let (a, b) = ([0.25, 0.0], [0.0, 0.125]);
        let z = p.intersect(a, b).unwrap();
        let s = z[1] - a[1];
        assert!((z[0] - a[0] - p.beta_v(a, s)).abs() < 1e-15);
        let t = z[0] - b[0];
        assert!((z[1] - b[1] - p.beta_h(b, t)).abs() < 1e-15);
    }

    #[test]
    fn resolution_exhausted() {
        assert!(matches!(
            build_grids(&PlaquePair::flat(), 0.5, 2, None, 50..=50, 2.5),
            Err(Error::ResolutionExhausted(50))
        ));
    }

    #[test]
    fn normalization() {
        let p = PlaquePair::curved(0.4, 0.1);
        assert_eq!(p.normalization_defect(&[[0.3, -0.2], [0.9, 0.5]]), 0.0);
    }
}
