//! Scenario files. TOML; unknown keys are rejected.

use anyhow::{bail, Context, Result};
use livsic::cocycle::FourierCocycle;
use livsic::skew::Fiber;
use livsic::torus::{HyperbolicAutomorphism, TorusPoint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "cat")]
    pub matrix: [[i64; 2]; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fiber: FiberKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<CocycleSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcf: Option<PathSpec>,
    #[serde(default)]
    pub bunching: BunchingSpec,
    #[serde(default)]
    pub regularity: RegularitySpec,
    #[serde(default)]
    pub jets: JetSpec,
}

fn cat() -> [[i64; 2]; 2] {
    [[2, 1], [1, 1]]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberKind {
    #[default]
    Line,
    Circle,
}

impl From<FiberKind> for Fiber {
    fn from(f: FiberKind) -> Fiber {
        match f {
            FiberKind::Line => Fiber::Line,
            FiberKind::Circle => Fiber::Circle,
        }
    }
}

/// One Fourier mode a cos(2 pi k.x) + b sin(2 pi k.x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: [i64; 2],
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// phi = mean + sum of `modes` + (Psi o A - Psi) for Psi given by `coboundary`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coboundary: Vec<ModeSpec>,
}

fn to_modes(v: &[ModeSpec]) -> Vec<([i64; 2], f64, f64)> {
    v.iter().map(|m| (m.k, m.a, m.b)).collect()
}

impl CocycleSpec {
    pub fn build(&self, a: &HyperbolicAutomorphism) -> FourierCocycle {
        let phi = FourierCocycle::from_modes(self.mean, &to_modes(&self.modes));
        if self.coboundary.is_empty() {
            return phi;
        }
        let psi = FourierCocycle::from_modes(0.0, &to_modes(&self.coboundary));
        phi.add(&FourierCocycle::coboundary_of(&psi, a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub grid_n: usize,
    pub tol: f64,
    pub max_period: u32,
    pub alternates: usize,
    pub anchor: [f64; 2],
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            grid_n: 32,
            tol: 1e-10,
            max_period: 8,
            alternates: 4,
            anchor: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: "out".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegSpecKind {
    S,
    U,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSpec {
    pub kind: LegSpecKind,
    pub d: f64,
}

/// Either an explicit leg list or a quadrilateral cycle u(du) s(ds) u(-du') s(-ds').
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub start: [f64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub legs: Vec<LegSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<[f64; 2]>,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    pub nu: f64,
    pub nu_hat: f64,
    pub gamma: f64,
    pub gamma_hat: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BunchingSpec {
    pub orders: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegularityMode {
    #[default]
    Journe,
    Expansion,
    Holder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// |x|^s
    Cusp,
    /// 1 + x - 2y + xy/2 + |x|^s + 0.7 |y|^s
    Decay,
    /// x^2 y + y^3
    Polynomial,
    /// sum 2^-k cos(2 pi 3^k x)
    Weierstrass,
    /// x
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularitySpec {
    pub mode: RegularityMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    /// CSV input: `pair_dist,delta` for holder, `z1,z2,value` for expansion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<String>,
    pub ell: usize,
    pub alpha: f64,
    pub exponent: f64,
    pub m_min: u32,
    pub m_max: u32,
    pub cone_min: f64,
    pub kappa: f64,
    pub ceiling: f64,
    pub center: [f64; 2],
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub shells: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub pairs: usize,
    pub terms: u32,
}

impl Default for RegularitySpec {
    fn default() -> Self {
        RegularitySpec {
            mode: RegularityMode::Journe,
            builtin: None,
            samples: None,
            ell: 2,
            alpha: 0.5,
            exponent: 2.5,
            m_min: 30,
            m_max: 44,
            cone_min: 1e-5,
            kappa: 2.5,
            ceiling: 10.0,
            center: [0.0, 0.0],
            outer_radius: 0.1,
            inner_radius: 1e-7,
            shells: 24,
            d_min: 1e-7,
            d_max: 1e-2,
            pairs: 2000,
            terms: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JetSpec {
    pub family: String,
    pub samples: usize,
    pub crosscheck: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl Default for JetSpec {
    fn default() -> Self {
        JetSpec {
            family: "diagonal".into(),
            samples: 200,
            crosscheck: 100,
            kappa: None,
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).context("malformed scenario")?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let sv = &self.solver;
        let r = &self.regularity;
        for (name, v) in [
            ("solver.tol", sv.tol),
            ("regularity.alpha", r.alpha),
            ("regularity.cone_min", r.cone_min),
            ("regularity.kappa", r.kappa),
            ("regularity.ceiling", r.ceiling),
            ("regularity.outer_radius", r.outer_radius),
            ("regularity.inner_radius", r.inner_radius),
            ("regularity.d_min", r.d_min),
            ("regularity.d_max", r.d_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if sv.grid_n < 2 {
            bail!("solver.grid_n must be at least 2");
        }
        if r.m_min > r.m_max {
            bail!("regularity.m_min exceeds m_max");
        }
        if let Some(p) = &self.pcf {
            if p.quad.is_some() == !p.legs.is_empty() {
                bail!("pcf needs exactly one of `legs` or `quad`");
            }
        }
        self.base()?;
        Ok(())
    }

    pub fn base(&self) -> Result<HyperbolicAutomorphism> {
        Ok(HyperbolicAutomorphism::new(self.matrix)?)
    }

    pub fn cocycle(&self) -> Result<FourierCocycle> {
        match &self.cocycle {
            Some(c) => Ok(c.build(&self.base()?)),
            None => bail!("scenario has no [cocycle] section"),
        }
    }

    pub fn anchor(&self) -> Result<TorusPoint> {
        Ok(TorusPoint::new(self.solver.anchor[0], self.solver.anchor[1])?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
seed = 7
fiber = "circle"

[cocycle]
mean = 0.25
modes = [{ k = [1, 0], a = 1.0 }]
coboundary = [{ k = [0, 1], b = 0.5 }]

[solver]
grid_n = 16
tol = 1e-9

[pcf]
start = [0.1, 0.2]
quad = [0.3, -0.2]
closed = true

[bunching]
orders = [1.0, 2.0]

[regularity]
mode = "holder"
builtin = "weierstrass"

[jets]
family = "cubic"
kappa = 0.5
"#;

    #[test]
    fn round_trip() {
        let s = Scenario::parse(FULL).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.fiber, FiberKind::Circle);
        let again = Scenario::parse(&s.to_toml()).unwrap();
        assert_eq!(s, again);
        let empty = Scenario::parse("").unwrap();
        assert_eq!(Scenario::parse(&empty.to_toml()).unwrap(), empty);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Scenario::parse("sede = 3").is_err());
        assert!(Scenario::parse("[solver]\ngrid = 3").is_err());
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(Scenario::parse("[solver]\ntol = 0.0").is_err());
        assert!(Scenario::parse("[regularity]\nalpha = -1.0").is_err());
    }

    #[test]
    fn non_hyperbolic_base_rejected() {
        assert!(Scenario::parse("matrix = [[1, 1], [0, 1]]").is_err());
    }

    #[test]
    fn coboundary_section_builds_coboundary() {
        let s = Scenario::parse("[cocycle]\ncoboundary = [{ k = [1, 1], a = 1.0 }]").unwrap();
        let a = s.base().unwrap();
        let phi = s.cocycle().unwrap();
        let p = TorusPoint::new(0.3, 0.4).unwrap();
        let psi = FourierCocycle::from_modes(0.0, &[([1, 1], 1.0, 0.0)]);
        assert!((phi.eval(&p) - (psi.eval(&a.apply(&p)) - psi.eval(&p))).abs() < 1e-12);
    }
}
