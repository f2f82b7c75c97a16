use std::io::Write as _;

use anyhow::{bail, Context, Result};
use livsic::cocycle::FourierCocycle;
use livsic::graph_transform::{
    explicit_first_order, jet_graph_transform, verify_fiber_contraction, BlockLinearMap, JetPoly, MonomialBasis, Poly,
    SyntheticFamily,
};
use livsic::pcf::{pcf_cycle, pcf_path};
use livsic::regularity::expansion::{expansion_fit, expansion_fit_samples, ExpansionConfig};
use livsic::regularity::holder::{holder_exponent_estimate, sample_pairs_1d, weierstrass, Pair};
use livsic::regularity::journe::{journe_limit_poly, JourneConfig};
use livsic::rng::seeded;
use livsic::skew::{
    check_center_bunched, check_partial_hyperbolicity, check_r_bunched, check_strong_r_bunched, BunchingRates,
    BunchingReport, SkewSystem,
};
use livsic::torus::{
    fixed_point_count, primitive_orbits, quad_cycle, AccessibleCycle, LegKind, RationalPoint, SuLeg, SuPath, TorusPoint,
};
use livsic::transfer::{classify, interpolated_residual, Classification, ClassifyConfig, WitnessKind};
use rand::Rng as _;
use serde::Serialize;

use crate::output::{csv_bytes, Staged};
use crate::scenario::{Builtin, LegSpecKind, RegularityMode, Scenario};

/// Verdict of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Write to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json<T: Serialize>(v: &T) {
    emit(&serde_json::to_string_pretty(v).expect("report serializes"));
}

#[derive(Serialize)]
struct LegReport {
    kind: &'static str,
    start: [f64; 2],
    displacement: f64,
}

fn leg_reports(path: &SuPath) -> Vec<LegReport> {
    path.legs
        .iter()
        .map(|l| LegReport {
            kind: match l.kind {
                LegKind::Stable => "s",
                LegKind::Unstable => "u",
            },
            start: [l.start.x1, l.start.x2],
            displacement: l.displacement,
        })
        .collect()
}

#[derive(Serialize)]
struct PcfReport {
    value: f64,
    error_bound: f64,
    terms: u64,
    closed: bool,
    end: [f64; 2],
    legs: Vec<LegReport>,
}

pub fn pcf(s: &Scenario) -> Result<(Outcome, Staged)> {
    let a = s.base()?;
    let phi = s.cocycle()?;
    let spec = s.pcf.as_ref().context("scenario has no [pcf] section")?;
    let start = TorusPoint::new(spec.start[0], spec.start[1])?;
    let tol = s.solver.tol;
    let (path, v, closed) = if let Some([du, ds]) = spec.quad {
        let c = quad_cycle(&a, &start, du, ds)?;
        let v = pcf_cycle(&phi, &a, &c, tol)?;
        (c.path, v, true)
    } else {
        let mut legs = Vec::new();
        let mut cur = start;
        for l in &spec.legs {
            let kind = match l.kind {
                LegSpecKind::S => LegKind::Stable,
                LegSpecKind::U => LegKind::Unstable,
            };
            let leg = SuLeg::new(&a, kind, cur, l.d);
            cur = leg.end;
            legs.push(leg);
        }
        let path = SuPath { anchor: start, legs };
        if spec.closed {
            let c = AccessibleCycle::from_path(path)?;
            let v = pcf_cycle(&phi, &a, &c, tol)?;
            (c.path, v, true)
        } else {
            let v = pcf_path(&phi, &a, &path, tol)?;
            (path, v, false)
        }
    };
    let end = path.end();
    print_json(&PcfReport {
        value: v.value,
        error_bound: v.error_bound,
        terms: v.terms_used,
        closed,
        end: [end.x1, end.x2],
        legs: leg_reports(&path),
    });
    Ok((Outcome::Pass, Staged::default()))
}

#[derive(Serialize)]
struct PointReport {
    num: [i64; 2],
    den: i64,
    x: [f64; 2],
}

impl From<&RationalPoint> for PointReport {
    fn from(p: &RationalPoint) -> Self {
        let t = p.to_torus();
        PointReport {
            num: p.num,
            den: p.den,
            x: [t.x1, t.x2],
        }
    }
}

#[derive(Serialize)]
struct WitnessReport {
    kind: &'static str,
    magnitude: f64,
    certified_floor: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    orbit: Vec<PointReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    cycle: Vec<LegReport>,
}

#[derive(Serialize)]
struct SolveReport {
    classification: &'static str,
    constant: f64,
    grid_n: usize,
    tol: f64,
    seed: u64,
    max_period: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interpolated_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistency_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_pcf_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessReport>,
}

pub fn solve(s: &Scenario) -> Result<(Outcome, Staged)> {
    let a = s.base()?;
    let phi = s.cocycle()?;
    let cfg = ClassifyConfig {
        max_period: s.solver.max_period,
        grid_n: s.solver.grid_n,
        tol: s.solver.tol,
        n_alternates: s.solver.alternates,
        seed: s.seed,
        anchor: s.anchor()?,
    };
    let mut report = SolveReport {
        classification: "coboundary",
        constant: phi.mean(),
        grid_n: cfg.grid_n,
        tol: cfg.tol,
        seed: cfg.seed,
        max_period: cfg.max_period,
        residual_sup: None,
        interpolated_residual: None,
        consistency_spread: None,
        max_pcf_error: None,
        witness: None,
    };
    let mut staged = Staged::default();
    let outcome = match classify(&phi, &a, &cfg)? {
        Classification::Coboundary(sol) => {
            let n = sol.grid_n;
            let rows = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
                let p = sol.node(i, j);
                [i.to_string(), j.to_string(), num(p.x1), num(p.x2), num(sol.value(i, j)), num(sol.errors[i * n + j])]
            });
            staged.add("grid.csv", csv_bytes(["i", "j", "x1", "x2", "phi_value", "pcf_error"], rows));
            report.residual_sup = Some(sol.residual_sup);
            report.interpolated_residual = Some(interpolated_residual(&phi, &a, &sol));
            report.consistency_spread = sol.consistency_spread;
            report.max_pcf_error = Some(sol.max_error());
            Outcome::Pass
        }
        Classification::Obstructed(w) => {
            report.classification = "obstructed";
            let (kind, orbit, cycle) = match &w.kind {
                WitnessKind::PeriodicOrbit(pts) => ("periodic_orbit", pts.iter().map(PointReport::from).collect(), Vec::new()),
                WitnessKind::AccessibleCycle(c) => ("accessible_cycle", Vec::new(), leg_reports(&c.path)),
            };
            report.witness = Some(WitnessReport {
                kind,
                magnitude: w.magnitude,
                certified_floor: w.certified_floor,
                orbit,
                cycle,
            });
            Outcome::Fail
        }
    };
    print_json(&report);
    staged.add_json("report.json", &report);
    staged.add("scenario.toml", s.to_toml());
    Ok((outcome, staged))
}

pub fn bunching(s: &Scenario) -> Result<(Outcome, Staged)> {
    let rates = match &s.bunching.rates {
        Some(r) => BunchingRates::new(r.nu, r.nu_hat, r.gamma, r.gamma_hat)?,
        None => {
            let phi = match &s.cocycle {
                Some(_) => s.cocycle()?,
                None => FourierCocycle::zero(),
            };
            SkewSystem::new(s.base()?, phi, s.fiber.into()).rates()
        }
    };
    let mut reports: Vec<BunchingReport> = vec![check_partial_hyperbolicity(&rates)];
    if !s.bunching.orders.is_empty() {
        reports.push(check_center_bunched(&rates));
        for &r in &s.bunching.orders {
            reports.push(check_r_bunched(&rates, r)?);
            reports.push(check_strong_r_bunched(&rates, r)?);
        }
    }
    let mut text = format!(
        "rates: nu = {}, nu_hat = {}, gamma = {}, gamma_hat = {}",
        rates.nu, rates.nu_hat, rates.gamma, rates.gamma_hat
    );
    for rep in &reports {
        for row in &rep.rows {
            text += &format!(
                "\n{:<24} {:<34} {:>5} margin {:+.6e}",
                rep.condition,
                row.label,
                if row.holds { "true" } else { "false" },
                row.margin
            );
        }
    }
    emit(&text);
    Ok((Outcome::from_bool(reports.iter().all(|r| r.holds())), Staged::default()))
}

fn builtin_2d(b: Builtin, s: f64) -> Box<dyn Fn([f64; 2]) -> f64> {
    match b {
        Builtin::Cusp => Box::new(move |z| z[0].abs().powf(s)),
        Builtin::Decay => {
            Box::new(move |z| 1.0 + z[0] - 2.0 * z[1] + 0.5 * z[0] * z[1] + z[0].abs().powf(s) + 0.7 * z[1].abs().powf(s))
        }
        Builtin::Polynomial => Box::new(|z| z[0] * z[0] * z[1] + z[1].powi(3)),
        Builtin::Weierstrass => Box::new(|z| weierstrass(z[0], 20)),
        Builtin::Linear => Box::new(|z| z[0]),
    }
}

fn read_columns(path: &str, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {path}"))?;
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| headers.iter().position(|h| h.trim() == *n).with_context(|| format!("{path}: missing column `{n}`")))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = idx
            .iter()
            .map(|&i| {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("{path}: bad number on data row {}", line + 1))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
    }
    Ok(out)
}

#[derive(Serialize)]
struct JourneOut {
    mode: &'static str,
    ell: usize,
    alpha: f64,
    admits: bool,
    max_cone_ratio: f64,
    limit: Vec<([u32; 2], f64)>,
    decay: Vec<DecayOut>,
}

#[derive(Serialize)]
struct DecayOut {
    p: u32,
    q: u32,
    exponent: Option<f64>,
    expected: f64,
    points: usize,
}

#[derive(Serialize)]
struct ExpansionOut {
    mode: &'static str,
    ell: u32,
    alpha: f64,
    constant: f64,
    growth_slope: f64,
    admits: bool,
    coefficients: Vec<(Vec<u32>, f64)>,
}

#[derive(Serialize)]
struct HolderOut {
    mode: &'static str,
    alpha_hat: f64,
    intercept: f64,
    r_squared: f64,
    pairs_used: usize,
}

pub fn regularity(s: &Scenario) -> Result<(Outcome, Staged)> {
    let r = &s.regularity;
    let mut staged = Staged::default();
    let source = match (&r.samples, r.builtin) {
        (Some(_), Some(_)) => bail!("give either regularity.samples or regularity.builtin, not both"),
        (None, None) => bail!("regularity needs a builtin test function or a samples file"),
        (samples, builtin) => (samples.clone(), builtin),
    };
    match r.mode {
        RegularityMode::Journe => {
            let Some(b) = source.1 else { bail!("journe mode needs a builtin test function") };
            let f = builtin_2d(b, r.exponent);
            let cfg = JourneConfig {
                m_min: r.m_min,
                m_max: r.m_max,
                kappa: r.kappa,
                cone_min: r.cone_min,
                ceiling: r.ceiling,
                ..JourneConfig::new(r.ell, r.alpha)
            };
            let rep = journe_limit_poly(&*f, &cfg)?;
            let rows = rep.rows.iter().map(|row| {
                [row.m.to_string(), num(row.r_m), num(row.eta_m), num(row.ratio), num(row.c_decay_exponent)]
            });
            staged.add("journe.csv", csv_bytes(["m", "R", "eta", "ratio", "c_decay_exponent"], rows));
            let out = JourneOut {
                mode: "journe",
                ell: r.ell,
                alpha: r.alpha,
                admits: rep.admits,
                max_cone_ratio: rep.max_cone_ratio,
                limit: rep.limit.terms.iter().map(|((p, q), c)| ([*p, *q], *c)).collect(),
                decay: rep
                    .decay
                    .iter()
                    .map(|d| DecayOut {
                        p: d.p,
                        q: d.q,
                        exponent: d.exponent,
                        expected: d.expected,
                        points: d.points,
                    })
                    .collect(),
            };
            print_json(&out);
            staged.add_json("regularity.json", &out);
            Ok((Outcome::from_bool(rep.admits), staged))
        }
        RegularityMode::Expansion => {
            let mut cfg = ExpansionConfig::with_range(r.outer_radius, r.inner_radius, r.shells);
            cfg.ceiling = r.ceiling;
            cfg.seed = s.seed;
            let ell = r.ell as u32;
            let fit = match source {
                (Some(path), _) => {
                    let rows = read_columns(&path, &["z1", "z2", "value"])?;
                    let samples: Vec<(Vec<f64>, f64)> = rows.into_iter().map(|v| (vec![v[0], v[1]], v[2])).collect();
                    expansion_fit_samples(&samples, &r.center, ell, r.alpha, r.ceiling)?
                }
                (None, Some(b)) => {
                    let f = builtin_2d(b, r.exponent);
                    expansion_fit(&|z: &[f64]| f([z[0], z[1]]), &r.center, ell, r.alpha, &cfg)?
                }
                (None, None) => unreachable!(),
            };
            let out = ExpansionOut {
                mode: "expansion",
                ell,
                alpha: r.alpha,
                constant: fit.constant,
                growth_slope: fit.growth_slope,
                admits: fit.admits,
                coefficients: fit.exponents.iter().cloned().zip(fit.coeffs.iter().cloned()).collect(),
            };
            print_json(&out);
            staged.add_json("regularity.json", &out);
            Ok((Outcome::from_bool(fit.admits), staged))
        }
        RegularityMode::Holder => {
            let pairs = match source {
                (Some(path), _) => read_columns(&path, &["pair_dist", "delta"])?
                    .into_iter()
                    .map(|v| Pair { dist: v[0], delta: v[1] })
                    .collect(),
                (None, Some(b)) => {
                    let f = builtin_2d(b, r.exponent);
                    let g: Box<dyn Fn(f64) -> f64> = match b {
                        Builtin::Weierstrass => {
                            let terms = r.terms;
                            Box::new(move |x| weierstrass(x, terms))
                        }
                        _ => Box::new(move |x| f([x, 0.0])),
                    };
                    sample_pairs_1d(&*g, (0.0, 1.0), (r.d_min, r.d_max), r.pairs, s.seed)
                }
                (None, None) => unreachable!(),
            };
            let est = holder_exponent_estimate(&pairs)?;
            let rows = pairs
                .iter()
                .map(|p| [num(p.dist), num(p.delta), num(p.dist.ln()), num(p.delta.abs().ln())]);
            staged.add("holder.csv", csv_bytes(["pair_dist", "delta", "log_dist", "log_delta"], rows));
            let out = HolderOut {
                mode: "holder",
                alpha_hat: est.alpha_hat,
                intercept: est.intercept,
                r_squared: est.r_squared,
                pairs_used: est.pairs_used,
            };
            print_json(&out);
            staged.add_json("regularity.json", &out);
            Ok((Outcome::Pass, staged))
        }
    }
}

#[derive(Serialize)]
struct JetsOut {
    family: String,
    holds: bool,
    max_ratio: Option<f64>,
    kappa: f64,
    l: Option<f64>,
    samples: usize,
    skipped: usize,
    violations: Vec<String>,
    h1_cases: usize,
    h1_max_difference: f64,
}

pub fn jets(s: &Scenario) -> Result<(Outcome, Staged)> {
    let family = SyntheticFamily::parse(&s.jets.family)?;
    let mut case = family.case(s.jets.samples, s.seed);
    if let Some(k) = s.jets.kappa {
        case.config.kappa = k;
    }
    let rep = verify_fiber_contraction(&case.map, case.m, &case.config)?;

    // cross-check the first-order formula against the compositional transform
    let (m, d) = (case.m, case.map.dim_in());
    let n = d - m;
    let mut rng = seeded(s.seed ^ 0x4831);
    let basis = MonomialBasis::new(m, 1);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..s.jets.crosscheck {
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..0.5)).collect();
        let comps = (0..n)
            .map(|_| {
                let mut p = Poly::zero(&basis);
                for c in p.coeffs_mut() {
                    *c = rng.random_range(-0.5..0.5);
                }
                p
            })
            .collect();
        let psi = JetPoly::new(x.clone(), comps)?;
        let mut v = x;
        v.extend(psi.value());
        let h = case.map.select(0..m).jet_at(&v, 1);
        let g = case.map.select(m..d).jet_at(&v, 1);
        let Ok(out) = jet_graph_transform(&h, &g, &psi) else { continue };
        let blocks = BlockLinearMap::from_jets(&h, &g, m);
        let Ok(p1) = explicit_first_order(&blocks, &psi.linear_part()) else { continue };
        worst = worst.max((out.linear_part() - p1).amax());
        cases += 1;
    }
    let ok = rep.holds() && worst <= 1e-10;
    let out = JetsOut {
        family: s.jets.family.clone(),
        holds: rep.holds(),
        max_ratio: rep.max_ratio,
        kappa: rep.kappa,
        l: rep.l,
        samples: rep.samples,
        skipped: rep.skipped,
        violations: rep.hypotheses.violations.clone(),
        h1_cases: cases,
        h1_max_difference: worst,
    };
    print_json(&out);
    Ok((Outcome::from_bool(ok), Staged::default()))
}

#[derive(Serialize)]
struct PeriodicOut {
    period: u32,
    fixed_points: i64,
    primitive_orbits: usize,
}

pub fn periodic(s: &Scenario, max_period: u32) -> Result<(Outcome, Staged)> {
    let a = s.base()?;
    let phi = match &s.cocycle {
        Some(_) => Some(s.cocycle()?),
        None => None,
    };
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut obstructed = false;
    for p in 1..=max_period {
        let orbits = primitive_orbits(&a, p, max_period)?;
        summary.push(PeriodicOut {
            period: p,
            fixed_points: fixed_point_count(&a, p)?,
            primitive_orbits: orbits.len(),
        });
        for (k, o) in orbits.iter().enumerate() {
            let sum = phi.as_ref().map(|f| f.orbit_sum(o) - f.mean() * o.period() as f64);
            if sum.is_some_and(|v| v.abs() > 1e-9) {
                obstructed = true;
            }
            for (i, pt) in o.points.iter().enumerate() {
                let t = pt.to_torus();
                rows.push([
                    p.to_string(),
                    k.to_string(),
                    i.to_string(),
                    pt.num[0].to_string(),
                    pt.num[1].to_string(),
                    pt.den.to_string(),
                    num(t.x1),
                    num(t.x2),
                    sum.map(num).unwrap_or_default(),
                ]);
            }
        }
    }
    print_json(&summary);
    let mut staged = Staged::default();
    staged.add(
        "periodic.csv",
        csv_bytes(["period", "orbit", "index", "num1", "num2", "den", "x1", "x2", "orbit_sum"], rows),
    );
    Ok((Outcome::from_bool(!obstructed), staged))
}
