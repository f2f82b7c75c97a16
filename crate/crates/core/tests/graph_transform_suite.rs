use livsic::cocycle::FourierCocycle;
use livsic::graph_transform::{
    explicit_first_order, interpolation_error_bound, iterate_to_fixed_point, jet_graph_transform, q_norm_bound,
    verify_fiber_contraction, BlockLinearMap, JetPoly, LeafGraph, MonomialBasis, Poly, PolyMap, SyntheticFamily,
};
use livsic::pcf::lifted_leaf_point;
use livsic::rng::{seeded, Rng};
use livsic::torus::{HyperbolicAutomorphism, LegKind, SuLeg, TorusPoint};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng as _;

fn random_poly(rng: &mut Rng, nvars: usize, degree: u32, scale: f64) -> Poly {
    let b = MonomialBasis::new(nvars, degree);
    let mut p = Poly::zero(&b);
    for c in p.coeffs_mut() {
        *c = rng.random_range(-scale..scale);
    }
    p
}

/// Perturbation of the hyperbolic block map diag(2, .., 1/2, ..).
fn random_map(rng: &mut Rng, m: usize, n: usize, degree: u32) -> PolyMap {
    let d = m + n;
    let comps = (0..d)
        .map(|i| {
            let mut p = random_poly(rng, d, degree, 0.1);
            let mut e = vec![0u32; d];
            e[i] = 1;
            let b = p.basis().clone();
            let lead = Poly::from_terms(&b, &[(&e, if i < m { 2.0 } else { 0.5 })]).unwrap();
            p = p.add(&lead);
            p
        })
        .collect();
    PolyMap::new(comps).unwrap()
}

fn random_section(rng: &mut Rng, m: usize, n: usize, order: u32) -> (Vec<f64>, JetPoly) {
    let x: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..0.5)).collect();
    let comps = (0..n).map(|_| random_poly(rng, m, order, 0.5)).collect();
    (x.clone(), JetPoly::new(x, comps).unwrap())
}

#[test]
fn leaf_fixed_point_matches_lifted_leaves() {
    let a = HyperbolicAutomorphism::cat();
    let mut rng = seeded(30);
    let phi = FourierCocycle::random(&mut rng, 3, 2, 0.5);
    let base = TorusPoint::origin();
    let g0 = LeafGraph::zero(base, 0.5, 2048).unwrap();
    let run = iterate_to_fixed_point(&phi, &a, &g0, 80, 1e-14).unwrap();
    assert!(run.converged);
    let bound = interpolation_error_bound(&phi, &a, &run.graph, run.iterations);
    let sp = run.graph.spline();
    for _ in 0..50 {
        let w = rng.random_range(-0.5..0.5);
        let leg = SuLeg::new(&a, LegKind::Unstable, base, w);
        let (_, t, err) = lifted_leaf_point(&phi, &a, (base, 0.0), &leg, 1e-13).unwrap();
        assert!((sp.eval(w) - t).abs() <= 1e-8 + bound + err, "w={w}");
    }
    let rate = run.rate_estimate.unwrap();
    let expect = 1.0 / a.lambda_u();
    assert!((rate - expect).abs() <= 0.15 * expect, "rate {rate}");
}

#[test]
fn first_order_formula_matches_composition() {
    let mut rng = seeded(31);
    for t in 0..100 {
        let (m, n) = (1 + t % 2, 1 + (t / 2) % 2);
        let map = random_map(&mut rng, m, n, 2);
        let (x, psi) = random_section(&mut rng, m, n, 1);
        let mut v = x.clone();
        v.extend(psi.value());
        let h = map.select(0..m).jet_at(&v, 1);
        let g = map.select(m..m + n).jet_at(&v, 1);
        let out = jet_graph_transform(&h, &g, &psi).unwrap();
        let blocks = BlockLinearMap::from_jets(&h, &g, m);
        let p1 = explicit_first_order(&blocks, &psi.linear_part()).unwrap();
        let diff = (out.linear_part() - p1).amax();
        assert!(diff <= 1e-10, "case {t}: {diff}");
    }
}

#[test]
fn transformed_jet_has_contact_of_order_l_plus_one() {
    // sigma(h(x, psi(x))) = g(x, psi(x)) up to O(|x - x0|^(l+1))
    let mut rng = seeded(32);
    for order in 1..=3u32 {
        let map = random_map(&mut rng, 1, 1, 3);
        let (x0, psi) = random_section(&mut rng, 1, 1, order);
        let mut v0 = x0.clone();
        v0.extend(psi.value());
        let h = map.select(0..1).jet_at(&v0, order);
        let g = map.select(1..2).jet_at(&v0, order);
        let sigma = jet_graph_transform(&h, &g, &psi).unwrap();
        let y0 = sigma.source()[0];
        let err = |d: f64| {
            let y = psi.eval_displacement(&[d])[0];
            let v = [x0[0] + d, y];
            let w = map.eval(&v);
            (sigma.eval_displacement(&[w[0] - y0])[0] - w[1]).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let slope = (e1 / e2).log2();
        assert!((slope - (order + 1) as f64).abs() < 0.2, "order {order}: slope {slope}");
        assert!(err(1e-3) <= 1e2 * 1e-3f64.powi(order as i32 + 1));
    }
}

#[test]
fn affine_maps_are_transformed_exactly() {
    let mut rng = seeded(33);
    let map = random_map(&mut rng, 1, 1, 1);
    let (x0, psi) = random_section(&mut rng, 1, 1, 1);
    let mut v0 = x0.clone();
    v0.extend(psi.value());
    let h = map.select(0..1).jet_at(&v0, 2);
    let g = map.select(1..2).jet_at(&v0, 2);
    let b = MonomialBasis::new(1, 2);
    let p = &psi.components()[0];
    let psi2 = JetPoly::new(x0.clone(), vec![Poly::from_terms(&b, &[(&[0], p.coeff(&[0])), (&[1], p.coeff(&[1]))]).unwrap()]).unwrap();
    let sigma = jet_graph_transform(&h, &g, &psi2).unwrap();
    // affine data stays affine
    assert!(sigma.components()[0].coeff(&[2]).abs() < 1e-14);
    for d in [1e-3, 0.1, 0.4] {
        let v = [x0[0] + d, psi2.eval_displacement(&[d])[0]];
        let w = map.eval(&v);
        let pred = sigma.eval_displacement(&[w[0] - sigma.source()[0]])[0];
        assert!((pred - w[1]).abs() <= 1e-8);
    }
}

#[test]
fn synthetic_families_contract() {
    for name in ["diagonal", "coupled", "cubic"] {
        let c = SyntheticFamily::parse(name).unwrap().case(200, 7);
        let r = verify_fiber_contraction(&c.map, c.m, &c.config).unwrap();
        assert!(r.hypotheses.violations.is_empty(), "{name}: {:?}", r.hypotheses.violations);
        let ratio = r.max_ratio.unwrap();
        assert!(ratio <= c.config.kappa + 1e-9, "{name}: {ratio}");
        assert!(r.samples > 0);
    }
    let c = SyntheticFamily::Identity.case(50, 7);
    let r = verify_fiber_contraction(&c.map, c.m, &c.config).unwrap();
    assert!(!r.holds());
}

#[test]
fn q_norm_bound_arithmetic() {
    for (a, k, order, expect) in [(2.0, 0.5, 1, 0.25), (2.0, 0.5, 3, 0.0625), (4.0, 1.0, 2, 0.0625), (1.0, 0.75, 5, 0.75)] {
        let blocks = BlockLinearMap {
            a: DMatrix::identity(2, 2) * a,
            b: DMatrix::zeros(2, 1),
            c: DMatrix::zeros(1, 2),
            k: DMatrix::identity(1, 1) * k,
        };
        assert_eq!(q_norm_bound(&blocks, order).unwrap(), expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaled_norm_is_a_norm(seed in any::<u64>(), l in 1.0..100.0f64, c in -3.0..3.0f64) {
        let mut rng = seeded(seed);
        let (_, p) = random_section(&mut rng, 2, 1, 2);
        let (_, q) = random_section(&mut rng, 2, 1, 2);
        let q = JetPoly::new(p.source().to_vec(), q.components().to_vec()).unwrap();
        let zero = JetPoly::new(p.source().to_vec(), vec![Poly::zero(p.basis())]).unwrap();
        let np = p.difference(&zero).scaled_norm(l);
        let nq = q.difference(&zero).scaled_norm(l);
        let sum = JetPoly::new(p.source().to_vec(), vec![p.components()[0].add(&q.components()[0])]).unwrap();
        prop_assert!(sum.difference(&zero).scaled_norm(l) <= np + nq + 1e-12);
        let scaled = JetPoly::new(p.source().to_vec(), vec![p.components()[0].scale(c)]).unwrap();
        prop_assert!((scaled.difference(&zero).scaled_norm(l) - c.abs() * np).abs() <= 1e-10 * (1.0 + np));
    }
}
