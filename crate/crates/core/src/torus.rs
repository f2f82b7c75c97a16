//! Hyperbolic toral automorphisms, stable/unstable legs, brackets and exact
//! periodic-point enumeration.

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

/// Point of T^2 = R^2 / Z^2 with coordinates in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub x1: f64,
    pub x2: f64,
}

impl TorusPoint {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        wrap([x1, x2])
    }

    pub fn origin() -> Self {
        TorusPoint { x1: 0.0, x2: 0.0 }
    }

    pub fn lift(&self) -> Vec2 {
        [self.x1, self.x2]
    }

    /// Translate by a vector of R^2 and reduce.
    pub fn shifted(&self, v: Vec2) -> Self {
        wrap_unchecked([self.x1 + v[0], self.x2 + v[1]])
    }

    /// Shortest displacement `other - self` among lifts.
    pub fn delta_to(&self, other: &TorusPoint) -> Vec2 {
        [
            centered(other.x1 - self.x1),
            centered(other.x2 - self.x2),
        ]
    }

    pub fn distance(&self, other: &TorusPoint) -> f64 {
        let d = self.delta_to(other);
        d[0].hypot(d[1])
    }
}

fn centered(d: f64) -> f64 {
    d - d.round()
}

fn reduce(c: f64) -> f64 {
    let r = c.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduce a vector of R^2 modulo Z^2.
pub fn wrap(v: Vec2) -> Result<TorusPoint> {
    for c in v {
        if !c.is_finite() {
            return Err(Error::NonFinite(c));
        }
    }
    Ok(wrap_unchecked(v))
}

pub(crate) fn wrap_unchecked(v: Vec2) -> TorusPoint {
    TorusPoint {
        x1: reduce(v[0]),
        x2: reduce(v[1]),
    }
}

pub type LatticeVector = [i64; 2];

/// Element of GL(2, Z) with |det| = 1 and |trace| > 2, with its eigen frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicAutomorphism {
    matrix: [[i64; 2]; 2],
    unstable_eigenvalue: f64,
    stable_eigenvalue: f64,
    unstable_dir: Vec2,
    stable_dir: Vec2,
}

impl HyperbolicAutomorphism {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a
            .checked_mul(d)
            .zip(b.checked_mul(c))
            .and_then(|(p, q)| p.checked_sub(q))
            .ok_or_else(|| Error::NotHyperbolic("entries too large".into()))?;
        if det.abs() != 1 {
            return Err(Error::NotHyperbolic(format!("determinant {det}")));
        }
        let tr = a + d;
        if tr.abs() <= 2 {
            return Err(Error::NotHyperbolic(format!("trace {tr}")));
        }
        let (trf, detf) = (tr as f64, det as f64);
        let disc = (trf * trf - 4.0 * detf).sqrt();
        let lu = 0.5 * (trf + trf.signum() * disc);
        let ls = detf / lu;
        let unstable_dir = eigenvector(&matrix, lu);
        let stable_dir = eigenvector(&matrix, ls);
        let out = HyperbolicAutomorphism {
            matrix,
            unstable_eigenvalue: lu,
            stable_eigenvalue: ls,
            unstable_dir,
            stable_dir,
        };
        for (v, l) in [(unstable_dir, lu), (stable_dir, ls)] {
            let av = out.apply_vec(v);
            let res = (av[0] - l * v[0]).hypot(av[1] - l * v[1]);
            if res > 1e-12 * lu.abs().max(1.0) {
                return Err(Error::NotHyperbolic(format!("eigen residual {res:e}")));
            }
        }
        Ok(out)
    }

    /// The cat map [[2,1],[1,1]].
    pub fn cat() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    pub fn det(&self) -> i64 {
        let [[a, b], [c, d]] = self.matrix;
        a * d - b * c
    }

    pub fn trace(&self) -> i64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// Signed eigenvalue with modulus > 1.
    pub fn lambda_u(&self) -> f64 {
        self.unstable_eigenvalue
    }

    /// Signed eigenvalue with modulus < 1.
    pub fn lambda_s(&self) -> f64 {
        self.stable_eigenvalue
    }

    pub fn v_u(&self) -> Vec2 {
        self.unstable_dir
    }

    pub fn v_s(&self) -> Vec2 {
        self.stable_dir
    }

    pub fn apply_vec(&self, v: Vec2) -> Vec2 {
        let m = self.matrix;
        [
            m[0][0] as f64 * v[0] + m[0][1] as f64 * v[1],
            m[1][0] as f64 * v[0] + m[1][1] as f64 * v[1],
        ]
    }

    pub fn inverse_matrix(&self) -> [[i64; 2]; 2] {
        let [[a, b], [c, d]] = self.matrix;
        let det = self.det();
        [[det * d, -det * b], [-det * c, det * a]]
    }

    pub fn apply_inverse_vec(&self, v: Vec2) -> Vec2 {
        let m = self.inverse_matrix();
        [
            m[0][0] as f64 * v[0] + m[0][1] as f64 * v[1],
            m[1][0] as f64 * v[0] + m[1][1] as f64 * v[1],
        ]
    }

    pub fn apply(&self, p: &TorusPoint) -> TorusPoint {
        wrap_unchecked(self.apply_vec(p.lift()))
    }

    pub fn apply_inverse(&self, p: &TorusPoint) -> TorusPoint {
        wrap_unchecked(self.apply_inverse_vec(p.lift()))
    }

    pub fn iterate(&self, p: &TorusPoint, n: i64) -> TorusPoint {
        let mut q = *p;
        for _ in 0..n.unsigned_abs() {
            q = if n > 0 { self.apply(&q) } else { self.apply_inverse(&q) };
        }
        q
    }

    pub fn direction(&self, kind: LegKind) -> Vec2 {
        match kind {
            LegKind::Stable => self.stable_dir,
            LegKind::Unstable => self.unstable_dir,
        }
    }
}

fn eigenvector(m: &[[i64; 2]; 2], l: f64) -> Vec2 {
    // (A - l I) v = 0 with first row (a - l, b): v = (b, l - a); b != 0 for
    // hyperbolic integer matrices.
    let b = m[0][1] as f64;
    let v = [b, l - m[0][0] as f64];
    let n = v[0].hypot(v[1]);
    let s = if v[0] < 0.0 { -1.0 } else { 1.0 };
    [s * v[0] / n, s * v[1] / n]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegKind {
    Stable,
    Unstable,
}

/// Straight segment inside a stable or unstable leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuLeg {
    pub kind: LegKind,
    pub start: TorusPoint,
    pub end: TorusPoint,
    /// Signed displacement along the unit eigenvector.
    pub displacement: f64,
}

impl SuLeg {
    pub fn new(a: &HyperbolicAutomorphism, kind: LegKind, start: TorusPoint, d: f64) -> Self {
        let v = a.direction(kind);
        SuLeg {
            kind,
            start,
            end: start.shifted([d * v[0], d * v[1]]),
            displacement: d,
        }
    }

    pub fn reversed(&self) -> Self {
        SuLeg {
            kind: self.kind,
            start: self.end,
            end: self.start,
            displacement: -self.displacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuPath {
    pub anchor: TorusPoint,
    pub legs: Vec<SuLeg>,
}

impl SuPath {
    pub fn end(&self) -> TorusPoint {
        self.legs.last().map(|l| l.end).unwrap_or(self.anchor)
    }

    pub fn reversed(&self) -> Self {
        SuPath {
            anchor: self.end(),
            legs: self.legs.iter().rev().map(SuLeg::reversed).collect(),
        }
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn then(&self, other: &SuPath) -> Result<SuPath> {
        if self.end().distance(&other.anchor) > 1e-9 {
            return Err(Error::InvalidArgument("paths do not connect".into()));
        }
        let mut legs = self.legs.clone();
        legs.extend(other.legs.iter().copied());
        Ok(SuPath {
            anchor: self.anchor,
            legs,
        })
    }

    /// Endpoint reached in the universal cover by summing the leg vectors.
    pub fn lifted_end(&self, a: &HyperbolicAutomorphism) -> Vec2 {
        let mut p = self.anchor.lift();
        for l in &self.legs {
            let v = a.direction(l.kind);
            p[0] += l.displacement * v[0];
            p[1] += l.displacement * v[1];
        }
        p
    }
}

/// Closed su-path.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessibleCycle {
    pub path: SuPath,
}

impl AccessibleCycle {
    pub fn from_path(path: SuPath) -> Result<Self> {
        let gap = path.end().distance(&path.anchor);
        if gap > 1e-9 {
            return Err(Error::InvalidArgument(format!("path does not close (gap {gap:e})")));
        }
        Ok(AccessibleCycle { path })
    }

    pub fn anchor(&self) -> TorusPoint {
        self.path.anchor
    }

    pub fn legs(&self) -> &[SuLeg] {
        &self.path.legs
    }
}

/// Result of the local product structure search.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub point: TorusPoint,
    pub unstable: SuLeg,
    pub stable: SuLeg,
    pub shift: LatticeVector,
}

impl Bracket {
    pub fn path(&self) -> SuPath {
        SuPath {
            anchor: self.unstable.start,
            legs: vec![self.unstable, self.stable],
        }
    }

    pub fn cost(&self) -> f64 {
        self.unstable.displacement.abs() + self.stable.displacement.abs()
    }
}

/// All solutions of s v_u - t v_s = y - x + k with ||k|| <= radius, ordered
/// by |s| + |t| and then lexicographically by k.
pub fn bracket_candidates(
    a: &HyperbolicAutomorphism,
    x: &TorusPoint,
    y: &TorusPoint,
    radius: f64,
) -> Result<Vec<Bracket>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::SearchRadiusExhausted(radius));
    }
    let (u, s) = (a.v_u(), a.v_s());
    // columns of [v_u, -v_s]
    let det = u[0] * (-s[1]) - (-s[0]) * u[1];
    let base = [y.x1 - x.x1, y.x2 - x.x2];
    let kmax = radius.floor() as i64;
    let mut found: Vec<(f64, LatticeVector, f64, f64)> = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            if ((k1 * k1 + k2 * k2) as f64) > radius * radius {
                continue;
            }
            let r = [base[0] + k1 as f64, base[1] + k2 as f64];
            let sc = (r[0] * (-s[1]) - (-s[0]) * r[1]) / det;
            let tc = (u[0] * r[1] - u[1] * r[0]) / det;
            found.push((sc.abs() + tc.abs(), [k1, k2], sc, tc));
        }
    }
    if found.is_empty() {
        return Err(Error::SearchRadiusExhausted(radius));
    }
    found.sort_by(|p, q| {
        let c = p.0 - q.0;
        if c.abs() > 1e-12 {
            p.0.partial_cmp(&q.0).unwrap()
        } else {
            p.1.cmp(&q.1)
        }
    });
    Ok(found
        .into_iter()
        .map(|(_, k, sc, tc)| {
            let unstable = SuLeg::new(a, LegKind::Unstable, *x, sc);
            let mut stable = SuLeg::new(a, LegKind::Stable, unstable.end, -tc);
            stable.end = *y;
            Bracket {
                point: unstable.end,
                unstable,
                stable,
                shift: k,
            }
        })
        .collect())
}

/// Bracket [x, y]: unstable leg from x, then stable leg into y.
pub fn bracket(
    a: &HyperbolicAutomorphism,
    x: &TorusPoint,
    y: &TorusPoint,
    radius: f64,
) -> Result<Bracket> {
    Ok(bracket_candidates(a, x, y, radius)?.remove(0))
}

pub fn su_path(
    a: &HyperbolicAutomorphism,
    x: &TorusPoint,
    y: &TorusPoint,
    radius: f64,
) -> Result<SuPath> {
    Ok(bracket(a, x, y, radius)?.path())
}

/// Four-leg cycle u:+du, s:+ds, u:-du, s:-ds built in the universal cover.
pub fn quad_cycle(
    a: &HyperbolicAutomorphism,
    x: &TorusPoint,
    du: f64,
    ds: f64,
) -> Result<AccessibleCycle> {
    if !du.is_finite() || !ds.is_finite() {
        return Err(Error::NonFinite(if du.is_finite() { ds } else { du }));
    }
    let specs = [
        (LegKind::Unstable, du),
        (LegKind::Stable, ds),
        (LegKind::Unstable, -du),
        (LegKind::Stable, -ds),
    ];
    let mut p = x.lift();
    let mut legs = Vec::with_capacity(4);
    for (kind, d) in specs {
        let v = a.direction(kind);
        let q = [p[0] + d * v[0], p[1] + d * v[1]];
        legs.push(SuLeg {
            kind,
            start: wrap_unchecked(p),
            end: wrap_unchecked(q),
            displacement: d,
        });
        p = q;
    }
    legs[3].end = *x;
    Ok(AccessibleCycle {
        path: SuPath { anchor: *x, legs },
    })
}

/// Exact rational point `num / den` of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint {
    pub num: [i64; 2],
    pub den: i64,
}

impl RationalPoint {
    pub fn to_torus(&self) -> TorusPoint {
        TorusPoint {
            x1: self.num[0] as f64 / self.den as f64,
            x2: self.num[1] as f64 / self.den as f64,
        }
    }

    pub fn apply(&self, m: &[[i64; 2]; 2]) -> RationalPoint {
        let d = self.den as i128;
        let (p, q) = (self.num[0] as i128, self.num[1] as i128);
        let r0 = (m[0][0] as i128 * p + m[0][1] as i128 * q).rem_euclid(d);
        let r1 = (m[1][0] as i128 * p + m[1][1] as i128 * q).rem_euclid(d);
        RationalPoint {
            num: [r0 as i64, r1 as i64],
            den: self.den,
        }
    }
}

/// Orbit of minimal period `points.len()`, starting at its smallest point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicOrbit {
    pub points: Vec<RationalPoint>,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.points.len()
    }
}

pub const DEFAULT_PERIOD_BOUND: u32 = 12;

fn mat_mul(p: &[[i128; 2]; 2], q: &[[i128; 2]; 2], n: u32) -> Result<[[i128; 2]; 2]> {
    let mut r = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc: i128 = 0;
            for k in 0..2 {
                let t = p[i][k].checked_mul(q[k][j]).ok_or(Error::Overflow(n))?;
                acc = acc.checked_add(t).ok_or(Error::Overflow(n))?;
            }
            r[i][j] = acc;
        }
    }
    Ok(r)
}

/// |det(A^n - I)|, the number of points fixed by A^n.
pub fn fixed_point_count(a: &HyperbolicAutomorphism, n: u32) -> Result<i64> {
    let m = power_minus_identity(a, n)?;
    det_abs(&m, n)
}

fn det_abs(m: &[[i128; 2]; 2], n: u32) -> Result<i64> {
    let d = m[0][0]
        .checked_mul(m[1][1])
        .zip(m[0][1].checked_mul(m[1][0]))
        .and_then(|(p, q)| p.checked_sub(q))
        .ok_or(Error::Overflow(n))?;
    i64::try_from(d.abs()).map_err(|_| Error::Overflow(n))
}

fn power_minus_identity(a: &HyperbolicAutomorphism, n: u32) -> Result<[[i128; 2]; 2]> {
    let base = a.matrix().map(|r| r.map(|v| v as i128));
    let mut p = [[1i128, 0], [0, 1]];
    for _ in 0..n {
        p = mat_mul(&p, &base, n)?;
    }
    p[0][0] -= 1;
    p[1][1] -= 1;
    Ok(p)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = q b + r
        let q = a.div_euclid(b);
        (g, y, x - q * y)
    }
}

/// Lower-triangular Hermite basis (h11, h21), (0, h22) of the lattice
/// generated by `gens` (must have full rank).
fn hermite_2d(gens: &[[i128; 2]]) -> ([i128; 2], i128) {
    let mut cols: Vec<[i128; 2]> = gens.to_vec();
    // combine columns until a single one carries the gcd of the first row
    let mut pivot = [0i128, 0];
    let mut rest: Vec<[i128; 2]> = Vec::new();
    for c in cols.drain(..) {
        if c[0] == 0 {
            rest.push(c);
            continue;
        }
        if pivot[0] == 0 {
            pivot = c;
            continue;
        }
        let (g, x, y) = ext_gcd(pivot[0], c[0]);
        let new_pivot = [g, x * pivot[1] + y * c[1]];
        let (pa, ca) = (pivot[0] / g, c[0] / g);
        let residual = [0, ca * pivot[1] - pa * c[1]];
        pivot = new_pivot;
        rest.push(residual);
    }
    if pivot[0] < 0 {
        pivot = [-pivot[0], -pivot[1]];
    }
    let mut h22 = 0i128;
    for r in rest {
        h22 = ext_gcd(h22, r[1]).0;
    }
    let h21 = if h22 != 0 { pivot[1].rem_euclid(h22) } else { pivot[1] };
    ([pivot[0], h21], h22)
}

/// Exact enumeration of {p : A^n p = p}, grouped into orbits of A. Every
/// point has denominator D = |det(A^n - I)|.
pub fn periodic_points(a: &HyperbolicAutomorphism, n: u32, bound: u32) -> Result<Vec<PeriodicOrbit>> {
    if n == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if n > bound {
        return Err(Error::BoundExceeded { period: n, bound });
    }
    let m = power_minus_identity(a, n)?;
    let d = det_abs(&m, n)? as i128;
    if d == 0 {
        return Err(Error::NotHyperbolic("A^n - I is singular".into()));
    }
    // p = adj(M) k / det(M): numerators over D form the lattice spanned by
    // the columns of adj(M) together with D Z^2.
    let adj = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
    let gens = [
        [adj[0][0].rem_euclid(d), adj[1][0].rem_euclid(d)],
        [adj[0][1].rem_euclid(d), adj[1][1].rem_euclid(d)],
        [d, 0],
        [0, d],
    ];
    let (b1, h22) = hermite_2d(&gens);
    let (n1, n2) = (d / b1[0], d / h22);
    let mut points = Vec::with_capacity((n1 * n2) as usize);
    for i in 0..n1 {
        for j in 0..n2 {
            let p0 = i * b1[0];
            let p1 = (i * b1[1] + j * h22).rem_euclid(d);
            points.push(RationalPoint {
                num: [p0 as i64, p1 as i64],
                den: d as i64,
            });
        }
    }
    points.sort();
    let mut seen = std::collections::HashSet::with_capacity(points.len());
    let mat = a.matrix();
    let mut orbits = Vec::new();
    for p in &points {
        if seen.contains(p) {
            continue;
        }
        let mut orbit = vec![*p];
        seen.insert(*p);
        let mut q = p.apply(&mat);
        while q != *p {
            seen.insert(q);
            orbit.push(q);
            q = q.apply(&mat);
        }
        orbits.push(PeriodicOrbit { points: orbit });
    }
    orbits.sort_by(|x, y| (x.period(), x.points[0]).cmp(&(y.period(), y.points[0])));
    Ok(orbits)
}

/// Orbits of minimal period exactly `n`.
pub fn primitive_orbits(a: &HyperbolicAutomorphism, n: u32, bound: u32) -> Result<Vec<PeriodicOrbit>> {
    Ok(periodic_points(a, n, bound)?
        .into_iter()
        .filter(|o| o.period() == n as usize)
        .collect())
}
