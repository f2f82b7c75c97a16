//! The skew product f_phi(x, t) = (A x, t + phi(x)) and the bunching
//! inequalities built from constant rates.

use crate::cocycle::FourierCocycle;
use crate::error::{Error, Result};
use crate::torus::{HyperbolicAutomorphism, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fiber {
    Line,
    Circle,
}

#[derive(Debug, Clone)]
pub struct SkewSystem {
    pub base: HyperbolicAutomorphism,
    pub cocycle: FourierCocycle,
    pub fiber: Fiber,
}

impl SkewSystem {
    pub fn new(base: HyperbolicAutomorphism, cocycle: FourierCocycle, fiber: Fiber) -> Self {
        SkewSystem { base, cocycle, fiber }
    }

    fn reduce(&self, t: f64) -> f64 {
        match self.fiber {
            Fiber::Line => t,
            Fiber::Circle => t.rem_euclid(1.0),
        }
    }

    pub fn apply(&self, p: &TorusPoint, t: f64) -> (TorusPoint, f64) {
        (self.base.apply(p), self.reduce(t + self.cocycle.eval(p)))
    }

    pub fn apply_inverse(&self, p: &TorusPoint, t: f64) -> (TorusPoint, f64) {
        let q = self.base.apply_inverse(p);
        (q, self.reduce(t - self.cocycle.eval(&q)))
    }

    pub fn iterate(&self, p: &TorusPoint, t: f64, n: i64) -> (TorusPoint, f64) {
        let mut s = (*p, t);
        for _ in 0..n.unsigned_abs() {
            s = if n > 0 {
                self.apply(&s.0, s.1)
            } else {
                self.apply_inverse(&s.0, s.1)
            };
        }
        s
    }

    /// Fiber gaps |t'_i - t_i| for i = 0..=n along the orbits of (x, t) and
    /// (x + d v_s, t'). The second orbit is tracked as the first plus the
    /// exact stable displacement d lambda_s^i.
    pub fn stable_pair_fiber_gaps(&self, x: &TorusPoint, t: f64, d: f64, t_other: f64, n: usize) -> Vec<f64> {
        let v = self.base.v_s();
        let ls = self.base.lambda_s();
        let mut y = x.lift();
        let (mut s, mut s2, mut di) = (t, t_other, d);
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            out.push(fiber_distance(self.fiber, s2 - s));
            if i == n {
                break;
            }
            s += self.cocycle.eval_lift(y);
            s2 += self.cocycle.eval_lift([y[0] + di * v[0], y[1] + di * v[1]]);
            y = self.base.apply(&crate::torus::wrap_unchecked(y)).lift();
            di *= ls;
        }
        out
    }

    /// Constant rates of the linear skew product: nu = nu_hat = 1/|lambda_u|
    /// and gamma = gamma_hat = 1 (isometric center).
    pub fn rates(&self) -> BunchingRates {
        let nu = 1.0 / self.base.lambda_u().abs();
        BunchingRates {
            nu,
            nu_hat: nu,
            gamma: 1.0,
            gamma_hat: 1.0,
        }
    }
}

fn fiber_distance(fiber: Fiber, d: f64) -> f64 {
    match fiber {
        Fiber::Line => d.abs(),
        Fiber::Circle => (d - d.round()).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BunchingRates {
    pub nu: f64,
    pub nu_hat: f64,
    pub gamma: f64,
    pub gamma_hat: f64,
}

impl BunchingRates {
    pub fn new(nu: f64, nu_hat: f64, gamma: f64, gamma_hat: f64) -> Result<Self> {
        for v in [nu, nu_hat, gamma, gamma_hat] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("rate {v} must be positive")));
            }
        }
        Ok(BunchingRates { nu, nu_hat, gamma, gamma_hat })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRow {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
    /// rhs - lhs; positive when the inequality holds with room.
    pub margin: f64,
}

impl InequalityRow {
    fn new(label: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        InequalityRow {
            label: label.to_string(),
            lhs,
            rhs,
            strict,
            holds,
            margin: rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BunchingReport {
    pub condition: String,
    pub rows: Vec<InequalityRow>,
}

impl BunchingReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| !r.holds).map(|r| r.label.as_str()).collect()
    }
}

fn check_order(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("order {r} must be non-negative")))
    }
}

/// nu < 1, nu_hat < 1, nu < gamma, gamma <= 1/gamma_hat, 1/gamma_hat < 1/nu_hat.
pub fn check_partial_hyperbolicity(r: &BunchingRates) -> BunchingReport {
    BunchingReport {
        condition: "partial hyperbolicity".into(),
        rows: vec![
            InequalityRow::new("nu < 1", r.nu, 1.0, true),
            InequalityRow::new("nu_hat < 1", r.nu_hat, 1.0, true),
            InequalityRow::new("nu < gamma", r.nu, r.gamma, true),
            InequalityRow::new("gamma <= 1/gamma_hat", r.gamma, 1.0 / r.gamma_hat, false),
            InequalityRow::new("1/gamma_hat < 1/nu_hat", 1.0 / r.gamma_hat, 1.0 / r.nu_hat, true),
        ],
    }
}

/// max(nu, nu_hat) < gamma gamma_hat.
pub fn check_center_bunched(r: &BunchingRates) -> BunchingReport {
    BunchingReport {
        condition: "center bunching".into(),
        rows: vec![InequalityRow::new(
            "max(nu, nu_hat) < gamma gamma_hat",
            r.nu.max(r.nu_hat),
            r.gamma * r.gamma_hat,
            true,
        )],
    }
}

/// nu < gamma^r, nu_hat < gamma_hat^r, nu < gamma gamma_hat^r,
/// nu_hat < gamma_hat gamma^r.
pub fn check_r_bunched(rates: &BunchingRates, order: f64) -> Result<BunchingReport> {
    check_order(order)?;
    let r = rates;
    Ok(BunchingReport {
        condition: format!("{order}-bunching"),
        rows: vec![
            InequalityRow::new("nu < gamma^r", r.nu, r.gamma.powf(order), true),
            InequalityRow::new("nu_hat < gamma_hat^r", r.nu_hat, r.gamma_hat.powf(order), true),
            InequalityRow::new("nu < gamma gamma_hat^r", r.nu, r.gamma * r.gamma_hat.powf(order), true),
            InequalityRow::new("nu_hat < gamma_hat gamma^r", r.nu_hat, r.gamma_hat * r.gamma.powf(order), true),
        ],
    })
}

/// max(nu, nu_hat) < gamma^r, max(nu, nu_hat) < gamma_hat^r plus the
/// cross inequalities of r-bunching.
pub fn check_strong_r_bunched(rates: &BunchingRates, order: f64) -> Result<BunchingReport> {
    check_order(order)?;
    let r = rates;
    let m = r.nu.max(r.nu_hat);
    Ok(BunchingReport {
        condition: format!("strong {order}-bunching"),
        rows: vec![
            InequalityRow::new("max(nu, nu_hat) < gamma^r", m, r.gamma.powf(order), true),
            InequalityRow::new("max(nu, nu_hat) < gamma_hat^r", m, r.gamma_hat.powf(order), true),
            InequalityRow::new("nu < gamma gamma_hat^r", r.nu, r.gamma * r.gamma_hat.powf(order), true),
            InequalityRow::new("nu_hat < gamma_hat gamma^r", r.nu_hat, r.gamma_hat * r.gamma.powf(order), true),
        ],
    })
}

/// Supremum of admissible holonomy Holder exponents theta: theta <= alpha
/// with nu < (nu mu_hat)^(theta/alpha) and nu/gamma < (nu mu_hat)^(theta/alpha),
/// taking mu_hat = nu_hat. The supremum is not attained when a rate
/// constraint binds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomyExponent {
    pub supremum: f64,
    pub attained: bool,
}

pub fn holonomy_exponent(r: &BunchingRates, alpha: f64) -> Result<HolonomyExponent> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} not in (0, 1]")));
    }
    let denom = r.nu.ln() + r.nu_hat.ln();
    if !(denom < 0.0) {
        return Err(Error::InvalidArgument("nu nu_hat must be < 1".into()));
    }
    let c1 = r.nu.ln() / denom;
    let c2 = (r.nu.ln() - r.gamma.ln()) / denom;
    let c = c1.min(c2);
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("no positive exponent is admissible".into()));
    }
    if c >= 1.0 {
        Ok(HolonomyExponent {
            supremum: alpha,
            attained: c > 1.0,
        })
    } else {
        Ok(HolonomyExponent {
            supremum: alpha * c,
            attained: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_rates_and_conditions() {
        let s = SkewSystem::new(HyperbolicAutomorphism::cat(), FourierCocycle::zero(), Fiber::Line);
        let r = s.rates();
        assert!((r.nu - 0.3819660112501051).abs() < 1e-12);
        let ph = check_partial_hyperbolicity(&r);
        assert!(ph.holds());
        assert!(check_center_bunched(&r).holds());
        for order in [1.0, 2.0, 5.0, 40.0] {
            assert!(check_r_bunched(&r, order).unwrap().holds());
            assert!(check_strong_r_bunched(&r, order).unwrap().holds());
        }
    }

    #[test]
    fn gamma_equal_nu_fails() {
        let r = BunchingRates::new(0.5, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(check_partial_hyperbolicity(&r).failing(), vec!["nu < gamma"]);
    }

    #[test]
    fn holonomy_exponent_cat() {
        let s = SkewSystem::new(HyperbolicAutomorphism::cat(), FourierCocycle::zero(), Fiber::Line);
        let h = holonomy_exponent(&s.rates(), 1.0).unwrap();
        assert_eq!(h.supremum, 0.5);
        assert!(!h.attained);
        assert_eq!(holonomy_exponent(&s.rates(), 0.5).unwrap().supremum, 0.25);
    }

    #[test]
    fn negative_order_rejected() {
        let r = BunchingRates::new(0.5, 0.5, 0.9, 0.9).unwrap();
        assert!(check_r_bunched(&r, -1.0).is_err());
    }

    #[test]
    fn circle_fiber_wraps() {
        let phi = FourierCocycle::constant(0.75);
        let s = SkewSystem::new(HyperbolicAutomorphism::cat(), phi, Fiber::Circle);
        let (_, t) = s.apply(&TorusPoint::origin(), 0.5);
        assert!((t - 0.25).abs() < 1e-15);
        let (p, t0) = s.apply_inverse(&TorusPoint::origin(), t);
        assert_eq!(p, TorusPoint::origin());
        assert!((t0 - 0.5).abs() < 1e-15);
    }
}
