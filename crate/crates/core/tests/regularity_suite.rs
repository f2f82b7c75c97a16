use livsic::regularity::calibration::{c0_1d, c0_rect, theta0_rect};
use livsic::regularity::expansion::{expansion_fit, expansion_fit_samples, ExpansionConfig};
use livsic::regularity::grids::{build_grids, ratio_bound, PlaquePair};
use livsic::regularity::holder::{holder_exponent_estimate, sample_pairs_1d, sample_pairs_grid, sample_pairs_torus, weierstrass};
use livsic::regularity::interp::{interpolate_1d, interpolate_rect, InterpolationGrid};
use livsic::regularity::journe::{cone_agreement, journe_limit_poly, JourneConfig};
use livsic::rng::seeded;
use proptest::prelude::*;
use rand::Rng as _;

fn cusp_family(z: [f64; 2]) -> f64 {
    1.0 + z[0] - 2.0 * z[1] + 0.5 * z[0] * z[1] + z[0].abs().powf(2.5) + 0.7 * z[1].abs().powf(2.5)
}

#[test]
fn journe_reproduces_polynomials() {
    let f = |z: [f64; 2]| z[0] * z[0] * z[1] + z[1].powi(3);
    let cfg = JourneConfig {
        m_min: 4,
        m_max: 14,
        ..JourneConfig::new(3, 0.5)
    };
    let r = journe_limit_poly(&f, &cfg).unwrap();
    for row in &r.rows[1..] {
        assert!(row.scaled_difference <= 1e-10, "m={} {}", row.m, row.scaled_difference);
    }
    assert!((r.limit.coeff(2, 1) - 1.0).abs() <= 1e-10);
    assert!((r.limit.coeff(0, 3) - 1.0).abs() <= 1e-10);
    assert!(r.limit.coeff(1, 1).abs() <= 1e-10);
}

#[test]
fn journe_cusp_verdicts() {
    let f = |z: [f64; 2]| z[0].abs().powf(2.5);
    let cfg = |alpha| JourneConfig {
        m_min: 30,
        m_max: 44,
        cone_min: 1e-5,
        ..JourneConfig::new(2, alpha)
    };
    let ok = journe_limit_poly(&f, &cfg(0.5)).unwrap();
    assert!(ok.admits);
    assert!(ok.max_cone_ratio <= 1.1);
    assert!(ok.limit.terms.iter().all(|(_, c)| c.abs() < 1e-3));
    let bad = journe_limit_poly(&f, &cfg(0.9)).unwrap();
    assert!(!bad.admits);
    // the worst point is on the innermost shell along the axis, where the
    // residual is |rho^2.5 - P(rho, 0)| / rho^2.9
    let rho = 1e-5f64;
    let axis = [rho, -rho]
        .iter()
        .map(|&x| (rho.powf(2.5) - bad.limit.eval([x, 0.0])).abs() / rho.powf(2.9))
        .fold(0.0, f64::max);
    assert!((bad.max_cone_ratio - axis).abs() <= 1e-6 * axis, "{} vs {axis}", bad.max_cone_ratio);
    assert!(axis > 10.0);
}

#[test]
fn journe_decay_exponents() {
    let cfg = JourneConfig {
        m_min: 4,
        m_max: 24,
        ..JourneConfig::new(2, 0.5)
    };
    let r = journe_limit_poly(&cusp_family, &cfg).unwrap();
    let mut fitted = 0;
    for d in &r.decay {
        if let Some(e) = d.exponent {
            assert!((e - d.expected).abs() <= 0.1, "({}, {}): {e} vs {}", d.p, d.q, d.expected);
            fitted += 1;
        }
    }
    assert!(fitted >= 4);
    assert!(r.rows.iter().all(|row| row.bound_holds));
}

#[test]
fn cone_runs_agree() {
    let tensor = |z: [f64; 2]| (1.0 + z[0] + 0.3 * z[0] * z[0]) * (2.0 - z[1] + 0.5 * z[1] * z[1]);
    let cfg = JourneConfig {
        m_min: 4,
        m_max: 13,
        plaques: PlaquePair::curved(0.3, -0.2),
        w: Some([0.3, 0.1]),
        ..JourneConfig::new(2, 0.5)
    };
    assert!(cone_agreement(&tensor, &cfg, Some([0.2, -0.15])).unwrap() <= 1e-8);
}

#[test]
fn cone_disagreement_shrinks_for_generic_smooth_input() {
    let f = |z: [f64; 2]| (z[0] - 0.5 * z[1]).sin() + (1.0 + z[1]).exp();
    let run = |m_max| {
        let cfg = JourneConfig {
            m_min: 4,
            m_max,
            plaques: PlaquePair::curved(0.3, -0.2),
            w: Some([0.3, 0.1]),
            ..JourneConfig::new(2, 0.5)
        };
        cone_agreement(&f, &cfg, Some([0.2, -0.15])).unwrap()
    };
    let (a, b) = (run(13), run(19));
    assert!(b < a / 4.0, "{a} -> {b}");
}

#[test]
fn flat_grids_are_product_grids() {
    let gs = build_grids(&PlaquePair::flat(), 0.5, 2, None, 4..=10, 2.5).unwrap();
    for g in &gs {
        for (idx, p) in g.grid.points.iter().enumerate() {
            let (a, b) = (idx / 3, idx % 3);
            assert_eq!(*p, [g.grid.xs[a], g.grid.ys[b]]);
        }
        assert!(g.ratio <= ratio_bound(0.5, 2));
        assert!(g.bounds_hold());
        assert!(g.substituted.is_none());
    }
}

#[test]
fn substitution_replaces_one_vertical_plaque() {
    let w = [0.13, 0.02];
    let gs = build_grids(&PlaquePair::curved(0.2, 0.1), 0.5, 2, Some(w), 4..=8, 2.5).unwrap();
    let hits: Vec<_> = gs.iter().filter(|g| g.substituted.is_some()).collect();
    assert!(!hits.is_empty());
    for g in hits {
        let j = g.substituted.unwrap();
        let replaced = (j - g.j) as usize + 1;
        let standard: Vec<usize> =
            (1..=2).filter(|&a| (g.grid.xs[a] - 0.5f64.powi((g.j as usize + a - 1) as i32)).abs() > 1e-15).collect();
        assert_eq!(standard, vec![replaced]);
    }
}

#[test]
fn calibrated_bounds_hold_on_random_node_sets() {
    let mut rng = seeded(40);
    let mut checked = 0;
    while checked < 1000 {
        let ell = 1 + checked % 3;
        let nodes: Vec<f64> = (0..=ell).map(|_| rng.random_range(-1.0..1.0)).collect();
        let vals: Vec<f64> = (0..=ell).map(|_| rng.random_range(-1.0..1.0)).collect();
        let Ok(r) = interpolate_1d(&nodes, &vals, 16.0) else { continue };
        assert!(r.bound_holds, "{nodes:?}");
        assert!(r.c0 == c0_1d(ell, 16.0).unwrap());
        checked += 1;
    }
}

#[test]
fn rect_interpolation_on_perturbed_grid() {
    let xs = vec![0.0, 0.5, 1.0];
    let ys = vec![0.0, 0.4, 0.9];
    let base = InterpolationGrid::product(xs.clone(), ys.clone()).unwrap();
    let eta = base.eta();
    let theta = theta0_rect(2, 8.0).unwrap();
    let mut rng = seeded(41);
    let pts: Vec<[f64; 2]> = base
        .points
        .iter()
        .map(|p| {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            [p[0] + 0.4 * theta * eta * a.cos(), p[1] + 0.4 * theta * eta * a.sin()]
        })
        .collect();
    let grid = InterpolationGrid::new(pts, xs, ys).unwrap();
    let f = |z: [f64; 2]| z[0] * z[0] * z[1] - 0.3 * z[1] + 1.0;
    let vals: Vec<f64> = grid.points.iter().map(|&z| f(z)).collect();
    let r = interpolate_rect(&grid, &vals, 8.0).unwrap();
    assert!((r.interp.coeff(2, 1) - 1.0).abs() <= 1e-6);
    assert!((r.interp.coeff(0, 1) + 0.3).abs() <= 1e-6);
    assert!(r.bound_holds);
    assert_eq!(r.c0, c0_rect(2, 8.0).unwrap());
}

#[test]
fn expansion_matches_analytic_classification() {
    let cfg = ExpansionConfig::with_range(0.1, 1e-7, 24);
    for ell in 1..=2u32 {
        for alpha in [0.25, 0.5, 0.75] {
            for s in [1.25, 1.5, 1.75, 2.25, 2.5, 2.75] {
                let f = |z: &[f64]| z[0].abs().powf(s);
                let fit = expansion_fit(&f, &[0.0, 0.0], ell, alpha, &cfg).unwrap();
                assert_eq!(fit.admits, ell as f64 + alpha <= s, "l={ell} alpha={alpha} s={s} C={}", fit.constant);
            }
        }
    }
}

#[test]
fn expansion_of_smooth_function_is_bounded_by_taylor_remainder() {
    let f = |z: &[f64]| (2.0 * z[0]).sin() * (z[1]).cos();
    let cfg = ExpansionConfig::with_range(0.1, 1e-3, 12);
    let fit = expansion_fit(&f, &[0.3, -0.2], 2, 0.5, &cfg).unwrap();
    // third derivatives of f are bounded by 8, so the remainder is at most
    // (8 * 8 / 6) |d|^3 <= 11 |d|^2.5 * |d|^0.5
    assert!(fit.admits);
    assert!(fit.constant <= 11.0 * 0.1f64.sqrt());
    assert!((fit.coeff(&[1, 0]) - 2.0 * (0.6f64).cos() * (-0.2f64).cos()).abs() < 1e-4);
}

#[test]
fn expansion_rejects_degenerate_samples() {
    let samples: Vec<(Vec<f64>, f64)> = (1..30).map(|i| (vec![0.01 * i as f64, 0.02 * i as f64], 1.0)).collect();
    assert!(expansion_fit_samples(&samples, &[0.0, 0.0], 2, 0.5, 10.0).is_err());
}

#[test]
fn holder_estimates() {
    let w = sample_pairs_1d(&|x| weierstrass(x, 20), (0.0, 1.0), (1e-7, 1e-2), 2000, 1);
    let e = holder_exponent_estimate(&w).unwrap();
    assert!((e.alpha_hat - 2f64.ln() / 3f64.ln()).abs() <= 0.08, "{}", e.alpha_hat);
    let l = sample_pairs_1d(&|x| x, (0.0, 1.0), (1e-6, 1e-1), 500, 2);
    let e = holder_exponent_estimate(&l).unwrap();
    assert!((0.95..=1.05).contains(&e.alpha_hat));
    let t = sample_pairs_torus(&|p| (std::f64::consts::TAU * p.x1).sin(), (1e-6, 1e-2), 500, 3);
    assert!((holder_exponent_estimate(&t).unwrap().alpha_hat - 1.0).abs() < 0.05);
    let n = 64;
    let vals: Vec<f64> = (0..n * n).map(|i| ((i / n) as f64 / n as f64 * std::f64::consts::TAU).cos()).collect();
    let g = sample_pairs_grid(&vals, n, 3, 400, 4);
    assert!(holder_exponent_estimate(&g).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_is_exact_on_polynomials(c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, c2 in -2.0..2.0f64, shift in -0.5..0.5f64) {
        let nodes = [shift, shift + 0.3, shift + 0.7];
        let vals: Vec<f64> = nodes.iter().map(|x| c0 + c1 * x + c2 * x * x).collect();
        let r = interpolate_1d(&nodes, &vals, 64.0).unwrap();
        prop_assert!((r.coeffs[0] - c0).abs() <= 1e-11);
        prop_assert!((r.coeffs[1] - c1).abs() <= 1e-11);
        prop_assert!((r.coeffs[2] - c2).abs() <= 1e-11);
    }

    #[test]
    fn holder_slope_of_power_laws(s in 0.3..1.0f64, seed in any::<u64>()) {
        let p = sample_pairs_1d(&|x: f64| x.powf(s), (0.0, 1.0), (1e-6, 1e-2), 300, seed);
        // increments of x^s are between s d x^(s-1) ... and d^s; the median slope lies in [s, 1]
        let e = holder_exponent_estimate(&p).unwrap();
        prop_assert!(e.alpha_hat >= s - 0.05 && e.alpha_hat <= 1.05);
    }
}
