use std::fs;
use std::path::Path;
use std::sync::Arc;

use degenpop::hum::HumConfig;
use degenpop::model::{ControlRegion, DispersionCoefficient, Field, Lattice, ModelError, Problem, Rates};
use degenpop::pde::{Renewal, Scheme};
use degenpop::scenarios;
use degenpop::selftest::S_BASE;
use degenpop::verify::CarlemanSource;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            initial: InitialConfig::default(),
            solve: SolveConfig::default(),
            control: ControlConfig::default(),
            verify: VerifyConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    Boundary0 { alpha: f64 },
    Boundary1 { alpha: f64 },
    Interior { alpha: f64, x0: f64 },
    Affine { c0: f64, c1: f64 },
    Constant { c: f64 },
}

impl CoefficientConfig {
    pub fn build(&self) -> Result<DispersionCoefficient, ModelError> {
        match *self {
            CoefficientConfig::Boundary0 { alpha } => DispersionCoefficient::boundary0(alpha),
            CoefficientConfig::Boundary1 { alpha } => DispersionCoefficient::boundary1(alpha),
            CoefficientConfig::Interior { alpha, x0 } => DispersionCoefficient::interior(alpha, x0),
            CoefficientConfig::Affine { c0, c1 } => DispersionCoefficient::affine(c0, c1),
            CoefficientConfig::Constant { c } => DispersionCoefficient::constant(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FertilityConfig {
    None,
    /// `amplitude·sin²` bump on `(ā, A)`.
    Bump { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub coefficient: CoefficientConfig,
    pub t_final: f64,
    pub a_max: f64,
    pub abar: f64,
    pub delta: f64,
    pub mortality: f64,
    pub fertility: FertilityConfig,
    /// One interval, or two on either side of an interior degeneracy.
    pub omega: Vec<[f64; 2]>,
    pub nx: usize,
    pub nt: usize,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            coefficient: CoefficientConfig::Boundary0 { alpha: 0.5 },
            t_final: scenarios::T_FINAL,
            a_max: scenarios::A_MAX,
            abar: scenarios::ABAR,
            delta: scenarios::DELTA,
            mortality: scenarios::MU0,
            fertility: FertilityConfig::Bump { amplitude: 1.0 },
            omega: vec![[0.3, 0.8]],
            nx: 65,
            nt: 64,
        }
    }
}

pub fn region(intervals: &[[f64; 2]]) -> Result<ControlRegion, CliError> {
    match intervals {
        [a] => Ok(ControlRegion::single(a[0], a[1])),
        [a, b] => Ok(ControlRegion::split(a[0], a[1], b[0], b[1])),
        _ => Err(CliError::Config(format!("a control set has one or two intervals, got {}", intervals.len()))),
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<Problem, CliError> {
        self.build_on(self.nx, self.nt)
    }

    pub fn build_on(&self, nx: usize, nt: usize) -> Result<Problem, CliError> {
        let k = self.coefficient.build()?;
        let mu0 = self.mortality;
        let beta = match self.fertility {
            FertilityConfig::None => Arc::new(|_: f64, _: f64| 0.0) as _,
            FertilityConfig::Bump { amplitude } => scenarios::bump_fertility(amplitude, self.abar, self.a_max),
        };
        let rates = Rates::new(Arc::new(move |_, _, _| mu0), beta, self.abar);
        let lattice = Lattice::new(nx, nt, self.t_final, self.a_max)?;
        Ok(Problem::new(k, rates, region(&self.omega)?, lattice, self.delta)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Gaussian in age times `sin πx`.
    Gaussian { center: f64, width: f64 },
    Random { seed: u64 },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Gaussian { center: 1.2, width: 0.25 }
    }
}

impl InitialConfig {
    pub fn build(&self, problem: &Problem) -> Result<Field, CliError> {
        match *self {
            InitialConfig::Gaussian { center, width } if width > 0.0 => Ok(scenarios::gaussian_datum(problem, center, width)),
            InitialConfig::Gaussian { width, .. } => Err(CliError::Config(format!("gaussian width {width} must be positive"))),
            InitialConfig::Random { seed } => Ok(scenarios::random_datum(problem, seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub scheme: Scheme,
    pub renewal: Renewal,
    /// Also write `t,a,x,value` rows.
    pub csv: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { scheme: Scheme::ImplicitEuler, renewal: Renewal::Integral, csv: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub epsilon: f64,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub scheme: Scheme,
    /// Free decay on `[0, T̃]` before the controlled window.
    pub two_phase: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        let h = HumConfig::default();
        Self { epsilon: h.epsilon, cg_tol: h.cg_tol, cg_max_iters: h.cg_max_iters, scheme: h.scheme, two_phase: false }
    }
}

impl ControlConfig {
    pub fn hum(&self) -> HumConfig {
        HumConfig { epsilon: self.epsilon, cg_tol: self.cg_tol, cg_max_iters: self.cg_max_iters, scheme: self.scheme }
    }
}

pub const FAMILIES: [&str; 7] = ["duality", "carleman_global", "carleman_local", "observability", "caccioppoli", "hardy", "energy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub families: Vec<String>,
    pub s_base: Vec<f64>,
    pub source: CarlemanSource,
    pub scheme: Scheme,
    pub seed: u64,
    pub trials: usize,
    pub ensemble: usize,
    pub hardy_nodes: usize,
    /// Caccioppoli sets; default to the control set and its middle half.
    pub caccioppoli_outer: Option<[f64; 2]>,
    pub caccioppoli_inner: Option<[f64; 2]>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            families: FAMILIES.iter().map(|s| s.to_string()).collect(),
            s_base: S_BASE.to_vec(),
            source: CarlemanSource::Manufactured,
            scheme: Scheme::ImplicitEuler,
            seed: 7,
            trials: 20,
            ensemble: 32,
            hardy_nodes: 1024,
            caccioppoli_outer: None,
            caccioppoli_inner: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// `[nx, nt]` pairs.
    pub grids: Vec<[usize; 2]>,
    /// Penalties for control runs; empty skips control.
    pub epsilon: Vec<f64>,
    /// Single base `s` values for the inequality families.
    pub s: Vec<f64>,
    pub families: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { grids: vec![[33, 32], [65, 64]], epsilon: vec![1e-8], s: S_BASE.to_vec(), families: vec!["carleman_global".into()] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(Config::parse("[problem]\nnx = 17\nbogus = 1\n").is_err());
        assert!(Config::parse("[nonsense]\n").is_err());
    }

    #[test]
    fn interior_problem_parses() {
        let c = Config::parse(
            r#"
            [problem]
            coefficient = { kind = "interior", alpha = 0.5, x0 = 0.5 }
            omega = [[0.2, 0.4], [0.6, 0.8]]
            nx = 17
            nt = 16
            "#,
        )
        .unwrap();
        let p = c.problem.build().unwrap();
        assert_eq!(p.lattice().na(), 32);
    }

    #[test]
    fn invalid_problem_is_config_error() {
        let c = Config::parse("[problem]\ndelta = 0.5\n").unwrap();
        assert!(matches!(c.problem.build(), Err(CliError::Config(_))));
    }
}
