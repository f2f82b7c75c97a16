//! Polynomial interpolation on separated 1-D node sets and on near-product
//! planar grids, with coefficient bounds from the calibrated constants.

use nalgebra::{DMatrix, DVector};

use super::calibration::{c0_1d, c0_rect, theta0_rect};
use crate::error::{Error, Result};

/// R = max |z_j| and eta = min |z_i - z_j|.
pub fn spread_1d(nodes: &[f64]) -> (f64, f64) {
    let r = nodes.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let mut eta = f64::INFINITY;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            eta = eta.min((nodes[i] - nodes[j]).abs());
        }
    }
    (r, eta)
}

/// Inverse of the Vandermonde matrix in the scaled variable z / R, together
/// with its entrywise 1-norm.
pub(crate) fn scaled_vandermonde_inverse(nodes: &[f64], r: f64) -> Result<(DMatrix<f64>, f64)> {
    let n = nodes.len();
    let v = DMatrix::from_fn(n, n, |j, p| (nodes[j] / r).powi(p as i32));
    let inv = v.try_inverse().ok_or(Error::Singular)?;
    let norm = inv.iter().map(|x| x.abs()).sum();
    Ok((inv, norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interp1d {
    /// Coefficients of 1, z, ..., z^l.
    pub coeffs: Vec<f64>,
    pub r: f64,
    pub eta: f64,
    /// sum |c_p| R^p
    pub coefficient_sum: f64,
    pub sup_b: f64,
    pub c0: f64,
    pub bound_holds: bool,
}

impl Interp1d {
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }
}

/// Interpolating polynomial of degree l = nodes.len() - 1; requires
/// R / eta <= ratio_bound.
pub fn interpolate_1d(nodes: &[f64], values: &[f64], ratio_bound: f64) -> Result<Interp1d> {
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::InvalidArgument("need matching, non-empty nodes and values".into()));
    }
    let ell = nodes.len() - 1;
    let sup_b = values.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if ell == 0 {
        return Ok(Interp1d {
            coeffs: vec![values[0]],
            r: nodes[0].abs(),
            eta: f64::INFINITY,
            coefficient_sum: values[0].abs(),
            sup_b,
            c0: 1.0,
            bound_holds: true,
        });
    }
    let (r, eta) = spread_1d(nodes);
    if !(eta > 0.0) {
        return Err(Error::GridDegenerate("coincident nodes".into()));
    }
    if r / eta > ratio_bound {
        return Err(Error::GridRatioExceeded { ratio: r / eta, bound: ratio_bound });
    }
    let c0 = c0_1d(ell, ratio_bound)?;
    let (inv, _) = scaled_vandermonde_inverse(nodes, r)?;
    let hat = inv * DVector::from_column_slice(values);
    let coeffs: Vec<f64> = hat.iter().enumerate().map(|(p, c)| c / r.powi(p as i32)).collect();
    let coefficient_sum = hat.iter().map(|c| c.abs()).sum();
    Ok(Interp1d {
        coeffs,
        r,
        eta,
        coefficient_sum,
        sup_b,
        c0,
        bound_holds: coefficient_sum <= c0 * sup_b * (1.0 + 1e-12),
    })
}

/// (l+1)^2 points z_{jk} near the product grid (x_j, y_k); index j (l+1) + k.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationGrid {
    pub points: Vec<[f64; 2]>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl InterpolationGrid {
    pub fn new(points: Vec<[f64; 2]>, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || points.len() != xs.len() * ys.len() || xs.is_empty() {
            return Err(Error::InvalidArgument("grid needs (l+1)^2 points".into()));
        }
        Ok(InterpolationGrid { points, xs, ys })
    }

    pub fn product(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let points = xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect();
        Self::new(points, xs, ys)
    }

    pub fn ell(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn r(&self) -> f64 {
        self.points.iter().fold(0.0f64, |m, p| m.max(p[0].hypot(p[1])))
    }

    pub fn eta(&self) -> f64 {
        let mut eta = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let (a, b) = (self.points[i], self.points[j]);
                eta = eta.min((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        eta
    }

    pub fn ratio(&self) -> f64 {
        self.r() / self.eta()
    }

    /// max |z_jk - (x_j, y_k)|.
    pub fn perturbation(&self) -> f64 {
        let n = self.ys.len();
        self.points
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let (j, k) = (idx / n, idx % n);
                (p[0] - self.xs[j]).hypot(p[1] - self.ys[k])
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectInterp {
    pub ell: usize,
    /// c_{pq} at index p (l+1) + q for the monomial x^p y^q.
    pub coeffs: Vec<f64>,
    pub r: f64,
    pub eta: f64,
    /// sum |c_pq| R^(p+q)
    pub coefficient_sum: f64,
    pub sup_b: f64,
    /// Entrywise 1-norm of the inverse scaled interpolation matrix.
    pub inverse_norm: f64,
    pub condition: f64,
}

impl RectInterp {
    pub fn coeff(&self, p: usize, q: usize) -> f64 {
        self.coeffs[p * (self.ell + 1) + q]
    }

    pub fn eval(&self, z: [f64; 2]) -> f64 {
        let n = self.ell + 1;
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += self.coeffs[p * n + q] * z[0].powi(p as i32) * z[1].powi(q as i32);
            }
        }
        s
    }
}

const CONDITION_LIMIT: f64 = 1e12;

/// Solve for the tensor polynomial in span{x^p y^q : p, q <= l} without
/// checking the ratio and perturbation preconditions.
pub fn solve_rect(grid: &InterpolationGrid, values: &[f64]) -> Result<RectInterp> {
    let n = grid.xs.len();
    if values.len() != n * n {
        return Err(Error::InvalidArgument("one value per grid point required".into()));
    }
    let r = grid.r();
    let eta = grid.eta();
    if !(eta > 0.0) || !(r > 0.0) {
        return Err(Error::GridDegenerate("coincident grid points".into()));
    }
    let mat = DMatrix::from_fn(n * n, n * n, |row, col| {
        let (p, q) = (col / n, col % n);
        let z = grid.points[row];
        (z[0] / r).powi(p as i32) * (z[1] / r).powi(q as i32)
    });
    let sv = mat.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::GridDegenerate(format!("condition number {condition:e}")));
    }
    let inv = mat.try_inverse().ok_or_else(|| Error::GridDegenerate("singular system".into()))?;
    let inverse_norm = inv.iter().map(|x| x.abs()).sum();
    let hat = &inv * DVector::from_column_slice(values);
    let coeffs = hat
        .iter()
        .enumerate()
        .map(|(col, c)| c / r.powi((col / n + col % n) as i32))
        .collect();
    Ok(RectInterp {
        ell: n - 1,
        coeffs,
        r,
        eta,
        coefficient_sum: hat.iter().map(|c| c.abs()).sum(),
        sup_b: values.iter().fold(0.0f64, |m, b| m.max(b.abs())),
        inverse_norm,
        condition,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedRectInterp {
    pub interp: RectInterp,
    pub c0: f64,
    pub bound_holds: bool,
}

/// Planar interpolation with the preconditions R / eta <= ratio_bound and
/// perturbation <= theta_0(B) eta enforced.
pub fn interpolate_rect(grid: &InterpolationGrid, values: &[f64], ratio_bound: f64) -> Result<CheckedRectInterp> {
    let eta = grid.eta();
    if !(eta > 0.0) {
        return Err(Error::GridDegenerate("coincident grid points".into()));
    }
    let ratio = grid.r() / eta;
    if ratio > ratio_bound {
        return Err(Error::GridRatioExceeded { ratio, bound: ratio_bound });
    }
    let ell = grid.ell();
    let theta = theta0_rect(ell, ratio_bound)?;
    let pert = grid.perturbation();
    if pert > theta * eta {
        return Err(Error::PerturbationExceeded {
            perturbation: pert,
            allowed: theta * eta,
        });
    }
    let c0 = c0_rect(ell, ratio_bound)?;
    let interp = solve_rect(grid, values)?;
    let bound_holds = interp.coefficient_sum <= c0 * interp.sup_b * (1.0 + 1e-12);
    Ok(CheckedRectInterp { interp, c0, bound_holds })
}
