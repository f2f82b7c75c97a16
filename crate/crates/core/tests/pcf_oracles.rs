mod common;

use common::{brute_force_fixed_points, oracle_stable, oracle_unstable, random_trig, Exact};
use livsic::cocycle::FourierCocycle;
use livsic::pcf::{lifted_leaf_point, pcf_cycle, pcf_leg, pcf_path, pcf_stable, pcf_unstable};
use livsic::rng::seeded;
use livsic::torus::{
    bracket, fixed_point_count, periodic_points, primitive_orbits, quad_cycle, HyperbolicAutomorphism, LegKind, SuLeg,
    SuPath, TorusPoint, wrap,
};
use proptest::prelude::*;
use rand::Rng as _;

#[test]
fn periodic_points_match_brute_force() {
    let a = HyperbolicAutomorphism::cat();
    for n in 1..=8 {
        let mut exact: Vec<[i64; 2]> = periodic_points(&a, n, 12)
            .unwrap()
            .iter()
            .flat_map(|o| o.points.iter().map(|p| p.num))
            .collect();
        exact.sort();
        let brute = brute_force_fixed_points(a.matrix(), n);
        assert_eq!(exact, brute, "n = {n}");
        assert_eq!(exact.len() as i64, fixed_point_count(&a, n).unwrap());
    }
}

#[test]
fn periodic_points_of_other_matrix() {
    let a = HyperbolicAutomorphism::new([[3, 1], [2, 1]]).unwrap();
    for n in 1..=4 {
        let mut exact: Vec<[i64; 2]> = periodic_points(&a, n, 12)
            .unwrap()
            .iter()
            .flat_map(|o| o.points.iter().map(|p| p.num))
            .collect();
        exact.sort();
        assert_eq!(exact, brute_force_fixed_points(a.matrix(), n), "n = {n}");
    }
}

#[test]
fn primitive_counts_by_mobius() {
    let a = HyperbolicAutomorphism::cat();
    for n in 1..=10u32 {
        let total: i64 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| d as i64 * primitive_orbits(&a, d, 12).unwrap().len() as i64)
            .sum();
        assert_eq!(total, fixed_point_count(&a, n).unwrap());
    }
}

#[test]
fn stable_and_unstable_legs_match_direct_summation() {
    let a = HyperbolicAutomorphism::cat();
    let mut rng = seeded(11);
    for _ in 0..40 {
        let phi = random_trig(&mut rng, 3);
        let x = Exact::random(&mut rng);
        let d = rng.random_range(-0.8..0.8);
        let s = pcf_stable(&phi, &a, &x.point(), d, 1e-12).unwrap();
        let so = oracle_stable(&phi, &a, &x, d);
        assert!((s.value - so).abs() <= s.error_bound + 1e-10, "{} vs {so}", s.value);
        let u = pcf_unstable(&phi, &a, &x.point(), d, 1e-12).unwrap();
        let uo = oracle_unstable(&phi, &a, &x, d);
        assert!((u.value - uo).abs() <= u.error_bound + 1e-10, "{} vs {uo}", u.value);
    }
}

#[test]
fn cosine_quad_cycle_is_nonzero_and_orientation_odd() {
    let a = HyperbolicAutomorphism::cat();
    let phi = FourierCocycle::from_modes(0.0, &[([1, 0], 1.0, 0.0)]);
    let x = TorusPoint::new(1.0 / 7.0, 3.0 / 7.0).unwrap();
    let c = quad_cycle(&a, &x, 0.3, -0.2).unwrap();
    let fwd = pcf_cycle(&phi, &a, &c, 1e-12).unwrap();
    let back = pcf_path(&phi, &a, &c.path.reversed(), 1e-12).unwrap();
    assert!(fwd.value.abs() > 1e-3);
    assert!((fwd.value + back.value).abs() <= fwd.error_bound + back.error_bound + 1e-10);
}

#[test]
fn path_reversal_and_leg_splitting() {
    let a = HyperbolicAutomorphism::cat();
    let mut rng = seeded(5);
    for _ in 0..20 {
        let phi = random_trig(&mut rng, 3);
        let x = TorusPoint::new(rng.random(), rng.random()).unwrap();
        let y = TorusPoint::new(rng.random(), rng.random()).unwrap();
        let p = bracket(&a, &x, &y, 2.0).unwrap().path();
        let fwd = pcf_path(&phi, &a, &p, 1e-12).unwrap();
        let back = pcf_path(&phi, &a, &p.reversed(), 1e-12).unwrap();
        assert!((fwd.value + back.value).abs() <= fwd.error_bound + back.error_bound + 1e-10);

        let (d1, d2) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        for kind in [LegKind::Stable, LegKind::Unstable] {
            let whole = pcf_leg(&phi, &a, &SuLeg::new(&a, kind, x, d1 + d2), 1e-12).unwrap();
            let first = SuLeg::new(&a, kind, x, d1);
            let second = SuLeg::new(&a, kind, first.end, d2);
            let split = SuPath {
                anchor: x,
                legs: vec![first, second],
            };
            let parts = pcf_path(&phi, &a, &split, 1e-12).unwrap();
            assert!((whole.value - parts.value).abs() <= whole.error_bound + parts.error_bound + 1e-10);
        }
    }
}

#[test]
fn lifted_point_fiber_gap_contracts() {
    use livsic::skew::{Fiber, SkewSystem};
    let a = HyperbolicAutomorphism::cat();
    let mut rng = seeded(8);
    let phi = random_trig(&mut rng, 3);
    let sys = SkewSystem::new(a.clone(), phi.clone(), Fiber::Line);
    let x = TorusPoint::new(0.31, 0.77).unwrap();
    let leg = SuLeg::new(&a, LegKind::Stable, x, 0.4);
    let (_, t2, err) = lifted_leaf_point(&phi, &a, (x, 0.25), &leg, 1e-13).unwrap();
    let gaps = sys.stable_pair_fiber_gaps(&x, 0.25, 0.4, t2, 40);
    assert!(err < 1e-12);
    assert!(gaps[40] <= 1e-8, "gap {}", gaps[40]);
    assert!(gaps[0] > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn telescoping_on_coboundaries(seed in any::<u64>(), x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, d in -1.0..1.0f64) {
        let a = HyperbolicAutomorphism::cat();
        let mut rng = seeded(seed);
        let psi = random_trig(&mut rng, 3);
        let phi = FourierCocycle::coboundary_of(&psi, &a);
        let x = TorusPoint::new(x1, x2).unwrap();
        for kind in [LegKind::Stable, LegKind::Unstable] {
            let leg = SuLeg::new(&a, kind, x, d);
            let v = pcf_leg(&phi, &a, &leg, 1e-12).unwrap();
            let expect = psi.eval(&x) - psi.eval(&leg.end);
            prop_assert!((v.value - expect).abs() <= v.error_bound + 1e-10);
        }
    }

    #[test]
    fn coboundary_cycles_vanish(seed in any::<u64>(), x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, du in -1.0..1.0f64, ds in -1.0..1.0f64) {
        let a = HyperbolicAutomorphism::cat();
        let mut rng = seeded(seed);
        let phi = FourierCocycle::coboundary_of(&random_trig(&mut rng, 2), &a);
        let c = quad_cycle(&a, &TorusPoint::new(x1, x2).unwrap(), du, ds).unwrap();
        let v = pcf_cycle(&phi, &a, &c, 1e-11).unwrap();
        prop_assert!(v.value.abs() <= v.error_bound + 1e-10);
    }

    #[test]
    fn bracket_connects(x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, y1 in 0.0..1.0f64, y2 in 0.0..1.0f64) {
        let a = HyperbolicAutomorphism::cat();
        let x = TorusPoint::new(x1, x2).unwrap();
        let y = TorusPoint::new(y1, y2).unwrap();
        let b = bracket(&a, &x, &y, 2.0).unwrap();
        let p = b.path();
        let e = p.lifted_end(&a);
        prop_assert!(wrap(e).unwrap().distance(&y) < 1e-12);
        prop_assert!(b.point.distance(&p.legs[0].end) < 1e-15);
    }

    #[test]
    fn automorphism_round_trip(x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, n in -6i64..6) {
        let a = HyperbolicAutomorphism::cat();
        let x = TorusPoint::new(x1, x2).unwrap();
        let y = a.iterate(&a.iterate(&x, n), -n);
        prop_assert!(y.distance(&x) < 1e-9);
        prop_assert!((0.0..1.0).contains(&y.x1) && (0.0..1.0).contains(&y.x2));
    }
}
