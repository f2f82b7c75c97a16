//! Periodic cycle functionals: truncated series over stable and unstable
//! legs with certified tail bounds.

use crate::cocycle::FourierCocycle;
use crate::error::{Error, Result};
use crate::torus::{wrap_unchecked, AccessibleCycle, HyperbolicAutomorphism, LegKind, SuLeg, SuPath, TorusPoint};

pub const TERM_BUDGET: u64 = 1_000_000;
const BOUND_SLACK: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcfValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms_used: u64,
}

impl PcfValue {
    fn zero() -> Self {
        PcfValue {
            value: 0.0,
            error_bound: 0.0,
            terms_used: 1,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")))
    }
}

/// Smallest n >= 1 with c mu^n <= tol.
fn terms_needed(c: f64, mu: f64, tol: f64) -> Result<u64> {
    if c <= tol {
        return Ok(1);
    }
    let n = ((tol / c).ln() / mu.ln()).ceil().max(1.0);
    if !(n <= TERM_BUDGET as f64) {
        return Err(Error::BudgetExceeded {
            needed: if n.is_finite() { n as u64 } else { u64::MAX },
            budget: TERM_BUDGET,
        });
    }
    let mut n = n as u64;
    // guard against rounding in the logarithms
    while c * mu.powi(n as i32) > tol {
        n += 1;
    }
    Ok(n)
}

/// sum_{i>=0} [phi(A^i x') - phi(A^i x)] with x' = x + d v_s.
///
/// The pair is advanced as a base orbit plus exact displacement d lambda_s^i,
/// never by iterating x' independently.
pub fn pcf_stable(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    x: &TorusPoint,
    d: f64,
    tol: f64,
) -> Result<PcfValue> {
    check_tol(tol)?;
    if !d.is_finite() {
        return Err(Error::NonFinite(d));
    }
    let lip = phi.lipschitz_bound();
    if d == 0.0 || lip == 0.0 {
        return Ok(PcfValue::zero());
    }
    let mu = a.lambda_s().abs();
    let c = lip * d.abs() / (1.0 - mu);
    let n = terms_needed(c, mu, tol)?;
    let v = a.v_s();
    let ls = a.lambda_s();
    let mut y = x.lift();
    let mut di = d;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += phi.eval_lift([y[0] + di * v[0], y[1] + di * v[1]]) - phi.eval_lift(y);
        y = wrap_unchecked(a.apply_vec(y)).lift();
        di *= ls;
    }
    Ok(PcfValue {
        value: sum,
        error_bound: c * mu.powi(n as i32) * BOUND_SLACK,
        terms_used: n,
    })
}

/// sum_{i>=1} [phi(A^-i x) - phi(A^-i x')] with x' = x + d v_u.
pub fn pcf_unstable(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    x: &TorusPoint,
    d: f64,
    tol: f64,
) -> Result<PcfValue> {
    check_tol(tol)?;
    if !d.is_finite() {
        return Err(Error::NonFinite(d));
    }
    let lip = phi.lipschitz_bound();
    if d == 0.0 || lip == 0.0 {
        return Ok(PcfValue::zero());
    }
    let mu = 1.0 / a.lambda_u().abs();
    // tail after n terms: lip |d| mu^(n+1) / (1 - mu)
    let c = lip * d.abs() * mu / (1.0 - mu);
    let n = terms_needed(c, mu, tol)?;
    let v = a.v_u();
    let inv_l = 1.0 / a.lambda_u();
    let mut y = x.lift();
    let mut di = d;
    let mut sum = 0.0;
    for _ in 0..n {
        y = wrap_unchecked(a.apply_inverse_vec(y)).lift();
        di *= inv_l;
        sum += phi.eval_lift(y) - phi.eval_lift([y[0] + di * v[0], y[1] + di * v[1]]);
    }
    Ok(PcfValue {
        value: sum,
        error_bound: c * mu.powi(n as i32) * BOUND_SLACK,
        terms_used: n,
    })
}

pub fn pcf_leg(phi: &FourierCocycle, a: &HyperbolicAutomorphism, leg: &SuLeg, tol: f64) -> Result<PcfValue> {
    match leg.kind {
        LegKind::Stable => pcf_stable(phi, a, &leg.start, leg.displacement, tol),
        LegKind::Unstable => pcf_unstable(phi, a, &leg.start, leg.displacement, tol),
    }
}

/// Sum of leg functionals; each leg gets tolerance tol / #legs.
pub fn pcf_path(phi: &FourierCocycle, a: &HyperbolicAutomorphism, path: &SuPath, tol: f64) -> Result<PcfValue> {
    check_tol(tol)?;
    if path.legs.is_empty() {
        return Ok(PcfValue::zero());
    }
    let leg_tol = tol / path.legs.len() as f64;
    let mut out = PcfValue {
        value: 0.0,
        error_bound: 0.0,
        terms_used: 0,
    };
    for leg in &path.legs {
        let v = pcf_leg(phi, a, leg, leg_tol)?;
        out.value += v.value;
        out.error_bound += v.error_bound;
        out.terms_used += v.terms_used;
    }
    Ok(out)
}

pub fn pcf_cycle(phi: &FourierCocycle, a: &HyperbolicAutomorphism, cycle: &AccessibleCycle, tol: f64) -> Result<PcfValue> {
    pcf_path(phi, a, &cycle.path, tol)
}

/// Endpoint in Z = T^2 x R of the lift of `leg` through (x, t) lying in the
/// corresponding leaf of the skew product: t' = t - PCF(leg).
pub fn lifted_leaf_point(
    phi: &FourierCocycle,
    a: &HyperbolicAutomorphism,
    point: (TorusPoint, f64),
    leg: &SuLeg,
    tol: f64,
) -> Result<(TorusPoint, f64, f64)> {
    let mut l = *leg;
    l.start = point.0;
    let v = a.direction(l.kind);
    l.end = point.0.shifted([l.displacement * v[0], l.displacement * v[1]]);
    let p = pcf_leg(phi, a, &l, tol)?;
    Ok((l.end, point.1 - p.value, p.error_bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi() -> FourierCocycle {
        FourierCocycle::from_modes(0.0, &[([1, 0], 0.0, 1.0)])
    }

    #[test]
    fn coboundary_stable_leg() {
        let a = HyperbolicAutomorphism::cat();
        let phi = FourierCocycle::coboundary_of(&psi(), &a);
        let x = TorusPoint::new(0.1, 0.2).unwrap();
        let d = 0.05;
        let p = pcf_stable(&phi, &a, &x, d, 1e-12).unwrap();
        let xp = x.shifted([d * a.v_s()[0], d * a.v_s()[1]]);
        let expect = psi().eval(&x) - psi().eval(&xp);
        assert!((p.value - expect).abs() <= p.error_bound + 1e-10);
    }

    #[test]
    fn coboundary_unstable_leg() {
        let a = HyperbolicAutomorphism::cat();
        let phi = FourierCocycle::coboundary_of(&psi(), &a);
        let x = TorusPoint::new(0.4, 0.9).unwrap();
        let d = -0.3;
        let p = pcf_unstable(&phi, &a, &x, d, 1e-12).unwrap();
        let xp = x.shifted([d * a.v_u()[0], d * a.v_u()[1]]);
        let expect = psi().eval(&x) - psi().eval(&xp);
        assert!((p.value - expect).abs() <= p.error_bound + 1e-10);
    }

    #[test]
    fn zero_displacement() {
        let a = HyperbolicAutomorphism::cat();
        let p = pcf_stable(&psi(), &a, &TorusPoint::origin(), 0.0, 1e-10).unwrap();
        assert_eq!((p.value, p.terms_used), (0.0, 1));
    }

    #[test]
    fn budget_exceeded() {
        // hyperbolic integer matrices contract by at least 1/2.618 per step,
        // so only a slowly contracting rate can exhaust the budget
        assert!(matches!(
            terms_needed(1.0, 1.0 - 1e-7, 1e-3),
            Err(Error::BudgetExceeded { .. })
        ));
        assert_eq!(terms_needed(1.0, 0.5, 0.25).unwrap(), 2);
        assert_eq!(terms_needed(0.1, 0.5, 0.25).unwrap(), 1);
    }

    #[test]
    fn lifted_leaf_displacement_is_coboundary_difference() {
        let a = HyperbolicAutomorphism::cat();
        let phi = FourierCocycle::coboundary_of(&psi(), &a);
        let x = TorusPoint::new(0.3, 0.6).unwrap();
        let leg = SuLeg::new(&a, LegKind::Unstable, x, 0.2);
        let (end, t, _) = lifted_leaf_point(&phi, &a, (x, 1.5), &leg, 1e-12).unwrap();
        let expect = psi().eval(&end) - psi().eval(&x);
        assert!((t - 1.5 - expect).abs() < 1e-10);
    }
}
