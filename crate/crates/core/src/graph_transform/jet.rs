//! Truncated multivariate polynomials and jets R^m -> R^n.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Monomials x^e with |e| <= degree in graded order: by total degree, then
/// lexicographically decreasing exponent vector.
#[derive(Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    exps: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    products: Vec<(usize, usize, usize)>,
}

fn exps_of_degree(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut tail in exps_of_degree(nvars - 1, d - first) {
            let mut e = vec![first];
            e.append(&mut tail);
            out.push(e);
        }
    }
    out
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u32) -> Arc<Self> {
        let mut exps = Vec::new();
        for d in 0..=degree {
            exps.extend(exps_of_degree(nvars, d));
        }
        let index: HashMap<Vec<u32>, usize> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let s: Vec<u32> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                if let Some(&k) = index.get(&s) {
                    products.push((i, j, k));
                }
            }
        }
        Arc::new(MonomialBasis {
            nvars,
            degree,
            exps,
            index,
            products,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }

    fn same_as(&self, other: &MonomialBasis) -> bool {
        self.nvars == other.nvars && self.degree == other.degree
    }
}

/// Polynomial with coefficients on a shared monomial basis; products are
/// truncated at the basis degree.
#[derive(Debug, Clone)]
pub struct Poly {
    basis: Arc<MonomialBasis>,
    coeffs: Vec<f64>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis) && self.coeffs == other.coeffs
    }
}

impl Poly {
    pub fn zero(basis: &Arc<MonomialBasis>) -> Self {
        Poly {
            basis: basis.clone(),
            coeffs: vec![0.0; basis.len()],
        }
    }

    pub fn constant(basis: &Arc<MonomialBasis>, c: f64) -> Self {
        let mut p = Self::zero(basis);
        p.coeffs[0] = c;
        p
    }

    pub fn variable(basis: &Arc<MonomialBasis>, i: usize) -> Self {
        let mut p = Self::zero(basis);
        let mut e = vec![0; basis.nvars];
        e[i] = 1;
        if let Some(k) = basis.index_of(&e) {
            p.coeffs[k] = 1.0;
        }
        p
    }

    pub fn from_terms(basis: &Arc<MonomialBasis>, terms: &[(&[u32], f64)]) -> Result<Self> {
        let mut p = Self::zero(basis);
        for (e, c) in terms {
            let k = basis
                .index_of(e)
                .ok_or_else(|| Error::InvalidArgument(format!("monomial {e:?} outside basis")))?;
            p.coeffs[k] += c;
        }
        Ok(p)
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, e: &[u32]) -> f64 {
        self.basis.index_of(e).map(|k| self.coeffs[k]).unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.basis
            .exps
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(e, c)| c * e.iter().zip(x).map(|(p, v)| v.powi(*p as i32)).product::<f64>())
            .sum()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (a, b) in p.coeffs.iter_mut().zip(&o.coeffs) {
            *a += b;
        }
        p
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (a, b) in p.coeffs.iter_mut().zip(&o.coeffs) {
            *a -= b;
        }
        p
    }

    pub fn scale(&self, c: f64) -> Poly {
        let mut p = self.clone();
        p.coeffs.iter_mut().for_each(|a| *a *= c);
        p
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(&self.basis);
        for &(i, j, k) in &self.basis.products {
            let (a, b) = (self.coeffs[i], o.coeffs[j]);
            if a != 0.0 && b != 0.0 {
                out.coeffs[k] += a * b;
            }
        }
        out
    }

    /// Terms of total degree exactly d.
    pub fn homogeneous(&self, d: u32) -> Poly {
        let mut p = self.clone();
        for (e, c) in self.basis.exps.iter().zip(p.coeffs.iter_mut()) {
            if e.iter().sum::<u32>() != d {
                *c = 0.0;
            }
        }
        p
    }

    /// Restriction to a basis of the same variables and lower degree.
    pub fn truncate(&self, basis: &Arc<MonomialBasis>) -> Poly {
        let mut p = Poly::zero(basis);
        for (k, e) in basis.exps.iter().enumerate() {
            p.coeffs[k] = self.coeff(e);
        }
        p
    }

    /// Substitute polynomials `subs` (on a common basis) for the variables.
    pub fn substitute(&self, subs: &[Poly]) -> Poly {
        let target = subs[0].basis.clone();
        let d = self.basis.degree as usize;
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(subs.len());
        for s in subs {
            let mut row = vec![Poly::constant(&target, 1.0)];
            for p in 1..=d {
                let next = row[p - 1].mul(s);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Poly::zero(&target);
        for (e, c) in self.basis.exps.iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut term = Poly::constant(&target, *c);
            for (j, &p) in e.iter().enumerate() {
                if p > 0 {
                    term = term.mul(&powers[j][p as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Taylor polynomial of order `order` of a map R^m -> R^n at
/// `source`, written in the displacement from `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoly {
    source: Vec<f64>,
    components: Vec<Poly>,
}

impl JetPoly {
    pub fn new(source: Vec<f64>, components: Vec<Poly>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("jet needs at least one component".into()));
        }
        let b = components[0].basis.clone();
        if b.nvars != source.len() || components.iter().any(|c| !c.basis.same_as(&b)) {
            return Err(Error::InvalidArgument("inconsistent jet dimensions".into()));
        }
        Ok(JetPoly { source, components })
    }

    pub fn identity(source: Vec<f64>, order: u32) -> Self {
        let b = MonomialBasis::new(source.len(), order);
        let components = (0..source.len())
            .map(|i| Poly::variable(&b, i).add(&Poly::constant(&b, source[i])))
            .collect();
        JetPoly { source, components }
    }

    pub fn m(&self) -> usize {
        self.source.len()
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> u32 {
        self.components[0].basis.degree
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.components[0].basis
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [Poly] {
        &mut self.components
    }

    /// Order-zero part (the target point).
    pub fn value(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }

    pub fn eval_displacement(&self, d: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(d)).collect()
    }

    /// Derivative tensor D^i at the source, as n rows of m^i entries with
    /// the multi-index (j_1, ..., j_i) flattened in row-major order.
    pub fn tensor(&self, i: u32) -> Vec<Vec<f64>> {
        let m = self.m();
        let len = m.pow(i);
        self.components
            .iter()
            .map(|c| {
                (0..len)
                    .map(|mut flat| {
                        let mut e = vec![0u32; m];
                        for _ in 0..i {
                            e[flat % m] += 1;
                            flat /= m;
                        }
                        let f: f64 = e.iter().map(|&p| factorial(p)).product();
                        f * c.coeff(&e)
                    })
                    .collect()
            })
            .collect()
    }

    /// Frobenius norm of D^i.
    pub fn tensor_norm(&self, i: u32) -> f64 {
        self.tensor(i).iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Linear part as an n x m matrix.
    pub fn linear_part(&self) -> DMatrix<f64> {
        let m = self.m();
        DMatrix::from_fn(self.n(), m, |r, c| {
            let mut e = vec![0; m];
            e[c] = 1;
            self.components[r].coeff(&e)
        })
    }

    /// Jet with the same source whose components are shifted copies of
    /// the differences (orders >= 1 only).
    pub fn difference(&self, other: &JetPoly) -> JetPoly {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                let mut d = a.sub(b);
                d.coeffs[0] = 0.0;
                d
            })
            .collect();
        JetPoly {
            source: self.source.clone(),
            components,
        }
    }

    /// L^l |P_1| + L^(l-1) |P_2| + ... + L |P_l|.
    pub fn scaled_norm(&self, l: f64) -> f64 {
        let order = self.order();
        let norms: Vec<f64> = (1..=order).map(|i| self.tensor_norm(i)).collect();
        scaled_norm(l, &norms)
    }
}

/// L^l n_1 + L^(l-1) n_2 + ... + L n_l for fiber norms n_1..n_l.
pub fn scaled_norm(l: f64, norms: &[f64]) -> f64 {
    let order = norms.len() as i32;
    norms
        .iter()
        .enumerate()
        .map(|(i, n)| l.powi(order - i as i32) * n)
        .sum()
}

fn check_source(expected: &[f64], found: &[f64]) -> Result<()> {
    let scale = expected.iter().chain(found).fold(1.0f64, |m, v| m.max(v.abs()));
    let close = expected.len() == found.len() && expected.iter().zip(found).all(|(a, b)| (a - b).abs() <= 1e-12 * scale);
    if close {
        Ok(())
    } else {
        Err(Error::SourceMismatch {
            expected: expected.to_vec(),
            found: found.to_vec(),
        })
    }
}

/// outer o inner; inner's target must be outer's source.
pub fn jet_compose(outer: &JetPoly, inner: &JetPoly) -> Result<JetPoly> {
    if inner.n() != outer.m() {
        return Err(Error::InvalidArgument("dimension mismatch in composition".into()));
    }
    check_source(&outer.source, &inner.value())?;
    let order = outer.order().min(inner.order());
    let ib = if inner.order() == order {
        inner.basis().clone()
    } else {
        MonomialBasis::new(inner.m(), order)
    };
    let shifted: Vec<Poly> = inner
        .components
        .iter()
        .map(|c| {
            let mut p = c.truncate(&ib);
            p.coeffs[0] = 0.0;
            p
        })
        .collect();
    let components = outer
        .components
        .iter()
        .map(|c| {
            let c = if outer.order() == order { c.clone() } else { c.truncate(&MonomialBasis::new(outer.m(), order)) };
            c.substitute(&shifted)
        })
        .collect();
    Ok(JetPoly {
        source: inner.source.clone(),
        components,
    })
}

/// Inverse jet of a jet with invertible linear part, by the fixed-point
/// iteration d = L^-1 (e - N(d)).
pub fn jet_invert(j: &JetPoly) -> Result<JetPoly> {
    if j.m() != j.n() {
        return Err(Error::InvalidArgument("only square jets can be inverted".into()));
    }
    let m = j.m();
    let lin = j.linear_part();
    let lu = lin.clone().lu();
    let linv = lu.try_inverse().ok_or(Error::Singular)?;
    let svd = lin.clone().svd(false, false);
    let smin = svd.singular_values.min();
    let smax = svd.singular_values.max();
    if !(smin > 1e-13 * smax.max(1.0)) {
        return Err(Error::Singular);
    }
    let b = j.basis().clone();
    // nonlinear part N (orders >= 2) in the displacement variables
    let nonlinear: Vec<Poly> = j
        .components
        .iter()
        .map(|c| {
            let mut p = c.clone();
            p.coeffs[0] = 0.0;
            for k in 0..m {
                let mut e = vec![0; m];
                e[k] = 1;
                p.coeffs[b.index_of(&e).unwrap()] = 0.0;
            }
            p
        })
        .collect();
    let vars: Vec<Poly> = (0..m).map(|i| Poly::variable(&b, i)).collect();
    let apply_linv = |v: &[Poly]| -> Vec<Poly> {
        (0..m)
            .map(|r| {
                let mut acc = Poly::zero(&b);
                for (c, p) in v.iter().enumerate() {
                    acc = acc.add(&p.scale(linv[(r, c)]));
                }
                acc
            })
            .collect()
    };
    let mut d = apply_linv(&vars);
    for _ in 0..j.order() {
        let nd: Vec<Poly> = nonlinear.iter().map(|p| p.substitute(&d)).collect();
        let rhs: Vec<Poly> = vars.iter().zip(&nd).map(|(e, n)| e.sub(n)).collect();
        d = apply_linv(&rhs);
    }
    let components = d
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.add(&Poly::constant(&b, j.source[i])))
        .collect();
    Ok(JetPoly {
        source: j.value(),
        components,
    })
}

/// Polynomial map R^d -> R^n in absolute coordinates.
#[derive(Debug, Clone)]
pub struct PolyMap {
    components: Vec<Poly>,
}

impl PolyMap {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("map needs at least one component".into()));
        }
        Ok(PolyMap { components })
    }

    pub fn dim_in(&self) -> usize {
        self.components[0].basis.nvars
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Components `range` as a separate map.
    pub fn select(&self, range: std::ops::Range<usize>) -> PolyMap {
        PolyMap {
            components: self.components[range].to_vec(),
        }
    }

    /// Taylor jet of order `order` at `x0`.
    pub fn jet_at(&self, x0: &[f64], order: u32) -> JetPoly {
        let full = self.components[0].basis.clone();
        let shift: Vec<Poly> = (0..full.nvars)
            .map(|i| Poly::variable(&full, i).add(&Poly::constant(&full, x0[i])))
            .collect();
        let small = MonomialBasis::new(full.nvars, order);
        let components = self.components.iter().map(|c| c.substitute(&shift).truncate(&small)).collect();
        JetPoly {
            source: x0.to_vec(),
            components,
        }
    }
}
