//! Order-l graph transform on jets of sections over a dominated splitting.

use nalgebra::DMatrix;
use rand::Rng as _;

use super::jet::{jet_compose, jet_invert, JetPoly, MonomialBasis, Poly, PolyMap};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// jet of x -> (x, psi(x)) at the source of psi.
fn graph_jet(psi: &JetPoly) -> JetPoly {
    let m = psi.m();
    let b = psi.basis().clone();
    let mut comps: Vec<Poly> = Vec::with_capacity(m + psi.n());
    for i in 0..m {
        comps.push(Poly::variable(&b, i).add(&Poly::constant(&b, psi.source()[i])));
    }
    comps.extend(psi.components().iter().cloned());
    JetPoly::new(psi.source().to_vec(), comps).expect("consistent graph jet")
}

/// H^l(j psi) = (g o (id, psi)) o (h o (id, psi))^-1 for jets h, g of the
/// two components of H at v = (x, psi(x)).
pub fn jet_graph_transform(h: &JetPoly, g: &JetPoly, psi: &JetPoly) -> Result<JetPoly> {
    let graph = graph_jet(psi);
    let hp = jet_compose(h, &graph)?;
    let gp = jet_compose(g, &graph)?;
    let inv = jet_invert(&hp).map_err(|e| match e {
        Error::Singular => Error::GraphTransformUndefined,
        other => other,
    })?;
    jet_compose(&gp, &inv)
}

/// Blocks of DH at v in the splitting R^m x R^n:
/// DH = [[A, B], [C, K]].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLinearMap {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl BlockLinearMap {
    pub fn from_jets(h: &JetPoly, g: &JetPoly, m: usize) -> Self {
        let lh = h.linear_part();
        let lg = g.linear_part();
        let n = g.n();
        BlockLinearMap {
            a: lh.columns(0, m).into_owned(),
            b: lh.columns(m, n).into_owned(),
            c: lg.columns(0, m).into_owned(),
            k: lg.columns(m, n).into_owned(),
        }
    }

    pub fn conorm_a(&self) -> f64 {
        self.a.clone().svd(false, false).singular_values.min()
    }

    pub fn norm_b(&self) -> f64 {
        self.b.clone().svd(false, false).singular_values.max()
    }

    pub fn norm_k(&self) -> f64 {
        self.k.clone().svd(false, false).singular_values.max()
    }
}

/// P1' = (C + K P1)(A + B P1)^-1.
pub fn explicit_first_order(blocks: &BlockLinearMap, p1: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let den = &blocks.a + &blocks.b * p1;
    let inv = den.try_inverse().ok_or(Error::GraphTransformUndefined)?;
    Ok((&blocks.c + &blocks.k * p1) * inv)
}

/// ||K|| / m(A)^l, the norm bound of the top-order linear part.
pub fn q_norm_bound(blocks: &BlockLinearMap, order: u32) -> Result<f64> {
    let m = blocks.conorm_a();
    if !(m > 0.0) {
        return Err(Error::Singular);
    }
    Ok(blocks.norm_k() / m.powi(order as i32))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub sup_b: f64,
    pub sup_k_over_a: f64,
    pub sup_k_over_a_order: f64,
    pub inf_conorm_a: f64,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub l: Option<f64>,
    pub max_ratio: Option<f64>,
    pub kappa: f64,
    pub samples: usize,
    pub skipped: usize,
    pub hypotheses: HypothesisReport,
    /// Ratios measured for each tried L.
    pub tried: Vec<(f64, f64)>,
}

impl ContractionReport {
    pub fn holds(&self) -> bool {
        self.hypotheses.violations.is_empty() && self.max_ratio.is_some_and(|r| r <= self.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionConfig {
    pub order: u32,
    pub kappa: f64,
    pub epsilon: f64,
    /// Fixed L, or None to search powers of ten.
    pub l: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

const L_CANDIDATES: [f64; 7] = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6];

fn random_in_ball(rng: &mut crate::rng::Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            return v;
        }
    }
}

/// Random jet at x with target y and |fiber part|_L = radius.
fn random_jet(rng: &mut crate::rng::Rng, x: &[f64], y: &[f64], order: u32, l: f64, radius: f64) -> JetPoly {
    let b = MonomialBasis::new(x.len(), order);
    let comps: Vec<Poly> = y
        .iter()
        .map(|&yv| {
            let mut p = Poly::constant(&b, 0.0);
            for c in p.coeffs_mut().iter_mut().skip(1) {
                *c = rng.random_range(-1.0..1.0);
            }
            p.coeffs_mut()[0] = yv;
            p
        })
        .collect();
    let mut j = JetPoly::new(x.to_vec(), comps).unwrap();
    let zero = JetPoly::new(x.to_vec(), y.iter().map(|&yv| Poly::constant(&b, yv)).collect()).unwrap();
    let s = j.difference(&zero).scaled_norm(l);
    for c in j.components_mut() {
        for v in c.coeffs_mut().iter_mut().skip(1) {
            *v *= radius / s;
        }
    }
    j
}

/// Check the dominated-splitting hypotheses on samples of the unit ball and
/// measure sup |H(psi) - H(psi')|_L / |psi - psi'|_L over random jet pairs.
pub fn verify_fiber_contraction(map: &PolyMap, m: usize, cfg: &ContractionConfig) -> Result<ContractionReport> {
    let d = map.dim_in();
    if map.dim_out() != d || m == 0 || m >= d {
        return Err(Error::InvalidArgument("H must map R^(m+n) to itself with m, n > 0".into()));
    }
    let n = d - m;
    let hmap = map.select(0..m);
    let gmap = map.select(m..d);
    let mut rng = seeded(cfg.seed);
    let points: Vec<Vec<f64>> = (0..cfg.samples.max(1)).map(|_| random_in_ball(&mut rng, d)).collect();
    let mut hyp = HypothesisReport {
        sup_b: 0.0,
        sup_k_over_a: 0.0,
        sup_k_over_a_order: 0.0,
        inf_conorm_a: f64::INFINITY,
        violations: Vec::new(),
    };
    for v in &points {
        let blocks = BlockLinearMap::from_jets(&hmap.jet_at(v, 1), &gmap.jet_at(v, 1), m);
        let ma = blocks.conorm_a();
        hyp.inf_conorm_a = hyp.inf_conorm_a.min(ma);
        hyp.sup_b = hyp.sup_b.max(blocks.norm_b());
        let nk = blocks.norm_k();
        hyp.sup_k_over_a = hyp.sup_k_over_a.max(nk / ma);
        hyp.sup_k_over_a_order = hyp.sup_k_over_a_order.max(nk / ma.powi(cfg.order as i32));
    }
    if hyp.sup_b > cfg.epsilon {
        hyp.violations.push(format!("sup |B| = {} > epsilon = {}", hyp.sup_b, cfg.epsilon));
    }
    if !(hyp.sup_k_over_a < cfg.kappa) {
        hyp.violations.push(format!("sup |K|/m(A) = {} >= kappa = {}", hyp.sup_k_over_a, cfg.kappa));
    }
    if !(hyp.sup_k_over_a_order < cfg.kappa) {
        hyp.violations.push(format!("sup |K|/m(A)^l = {} >= kappa = {}", hyp.sup_k_over_a_order, cfg.kappa));
    }
    if !(hyp.inf_conorm_a >= 1.0) {
        hyp.violations.push(format!("inf m(A) = {} < 1", hyp.inf_conorm_a));
    }
    let mut report = ContractionReport {
        l: None,
        max_ratio: None,
        kappa: cfg.kappa,
        samples: 0,
        skipped: 0,
        hypotheses: hyp,
        tried: Vec::new(),
    };
    if !report.hypotheses.violations.is_empty() {
        return Ok(report);
    }
    let candidates: Vec<f64> = match cfg.l {
        Some(l) => vec![l],
        None => L_CANDIDATES.to_vec(),
    };
    for l in candidates {
        let mut worst = 0.0f64;
        let (mut used, mut skipped) = (0, 0);
        for v in &points {
            let (x, y) = v.split_at(m);
            let hj = hmap.jet_at(v, cfg.order);
            let gj = gmap.jet_at(v, cfg.order);
            let r1 = rng.random_range(0.05..1.0);
            let r2 = rng.random_range(0.05..1.0);
            let p = random_jet(&mut rng, x, y, cfg.order, l, r1);
            let q = random_jet(&mut rng, x, y, cfg.order, l, r2);
            let den = p.difference(&q).scaled_norm(l);
            if den < 1e-12 {
                skipped += 1;
                continue;
            }
            let (hp, hq) = match (jet_graph_transform(&hj, &gj, &p), jet_graph_transform(&hj, &gj, &q)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            worst = worst.max(hp.difference(&hq).scaled_norm(l) / den);
            used += 1;
        }
        debug_assert_eq!(n, d - m);
        report.tried.push((l, worst));
        report.l = Some(l);
        report.max_ratio = Some(worst);
        report.samples = used;
        report.skipped = skipped;
        if worst <= cfg.kappa {
            break;
        }
    }
    Ok(report)
}

/// Synthetic dominated-splitting diffeomorphisms used for verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticFamily {
    /// h = 2x, g = y / 2 on R x R.
    Diagonal,
    /// Linear map of R^2 x R^2 with small coupling B.
    Coupled,
    /// Nonlinear cubic map of R x R with small coupling B.
    Cubic,
    /// H = id (violates the contraction hypotheses).
    Identity,
}

#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub map: PolyMap,
    pub m: usize,
    pub config: ContractionConfig,
}

impl SyntheticFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(Self::Diagonal),
            "coupled" => Ok(Self::Coupled),
            "cubic" => Ok(Self::Cubic),
            "identity" => Ok(Self::Identity),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }

    pub fn case(&self, samples: usize, seed: u64) -> SyntheticCase {
        let base = ContractionConfig {
            order: 2,
            kappa: 0.3,
            epsilon: 0.05,
            l: None,
            samples,
            seed,
        };
        match self {
            Self::Diagonal => {
                let b = MonomialBasis::new(2, 1);
                let map = PolyMap::new(vec![
                    Poly::from_terms(&b, &[(&[1, 0], 2.0)]).unwrap(),
                    Poly::from_terms(&b, &[(&[0, 1], 0.5)]).unwrap(),
                ])
                .unwrap();
                SyntheticCase { map, m: 1, config: base }
            }
            Self::Coupled => {
                let b = MonomialBasis::new(4, 1);
                let rows: [[f64; 4]; 4] = [
                    [2.0, 0.3, 0.01, 0.0],
                    [-0.2, 1.8, 0.0, 0.01],
                    [0.5, -0.2, 0.4, 0.1],
                    [0.1, 0.3, 0.05, 0.3],
                ];
                let comps = rows
                    .iter()
                    .map(|r| {
                        let terms: Vec<(Vec<u32>, f64)> = (0..4)
                            .map(|k| {
                                let mut e = vec![0u32; 4];
                                e[k] = 1;
                                (e, r[k])
                            })
                            .collect();
                        let refs: Vec<(&[u32], f64)> = terms.iter().map(|(e, c)| (e.as_slice(), *c)).collect();
                        Poly::from_terms(&b, &refs).unwrap()
                    })
                    .collect();
                SyntheticCase {
                    map: PolyMap::new(comps).unwrap(),
                    m: 2,
                    config: ContractionConfig { kappa: 0.45, ..base },
                }
            }
            Self::Cubic => {
                let b = MonomialBasis::new(2, 3);
                let h = Poly::from_terms(&b, &[(&[1, 0], 1.8), (&[2, 0], 0.1), (&[3, 0], -0.05), (&[0, 1], 0.01)]).unwrap();
                let g = Poly::from_terms(
                    &b,
                    &[(&[0, 1], 0.4), (&[2, 0], 0.3), (&[1, 1], 0.1), (&[0, 2], 0.05), (&[3, 0], 0.2)],
                )
                .unwrap();
                SyntheticCase {
                    map: PolyMap::new(vec![h, g]).unwrap(),
                    m: 1,
                    config: ContractionConfig {
                        order: 3,
                        kappa: 0.5,
                        epsilon: 0.02,
                        ..base
                    },
                }
            }
            Self::Identity => {
                let b = MonomialBasis::new(2, 1);
                let map = PolyMap::new(vec![Poly::variable(&b, 0), Poly::variable(&b, 1)]).unwrap();
                SyntheticCase { map, m: 1, config: base }
            }
        }
    }
}
