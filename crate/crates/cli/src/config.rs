//! Run configuration: a TOML file whose sections mirror the core setups.
//! Every key is optional and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stheat::heat::SatOverrides;
use stheat::optimizer::MmaConfig;
use stheat::presets::{HeatSinkSetup, ManufacturedSetup, TwoDomainSetup};
use stheat::verification::SolverKind;

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub tau_rho: f64,
    pub tau_j: f64,
    pub max_iters: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            tau_rho: 1e-4,
            tau_j: 1e-8,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Acceptance criteria to run, 1 to 8.
    pub criteria: Vec<u32>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            criteria: vec![1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    /// Degrees for the manufactured-solution study (same in space and time).
    pub degrees: Vec<usize>,
    /// Backward Euler runs as `[refinement, steps]` pairs.
    pub be_runs: Vec<[usize; 2]>,
    /// Resolutions `[N_x, N_t]` for the two-subdomain optimum.
    pub crossvalidation: Vec<[usize; 2]>,
    pub n_modes: usize,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            degrees: (2..=14).step_by(2).collect(),
            be_runs: vec![[4, 64], [4, 128], [4, 256], [4, 512]],
            crossvalidation: vec![[4, 4], [8, 8], [16, 16], [40, 30]],
            n_modes: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub solver: SolverKind,
    /// Temporal degree for `st-se`, step count for the backward Euler solvers.
    pub nt: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            solver: SolverKind::StSe,
            nt: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub solvers: Vec<SolverKind>,
    pub be_steps: Vec<usize>,
    pub st_degrees: Vec<usize>,
    pub repetitions: usize,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            solvers: vec![SolverKind::BeFe, SolverKind::BeFeAao, SolverKind::StSe],
            be_steps: (3..=14).map(|e| 1usize << e).collect(),
            st_degrees: vec![11, 13, 15],
            repetitions: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub heat_sink: HeatSinkSetup,
    pub two_domain: TwoDomainSetup,
    pub manufactured: ManufacturedSetup,
    pub sat: SatOverrides,
    pub mma: MmaConfig,
    pub optimizer: OptimizerSection,
    pub verify: VerifySection,
    pub converge: ConvergeSection,
    pub optimize: OptimizeSection,
    pub compare: CompareSection,
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("{key}: must be positive, got {v}")))
    }
}

fn nonempty<T>(key: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(ConfigError(format!("{key}: must not be empty")))
    } else {
        Ok(())
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<(), ConfigError> {
    if v < min {
        Err(ConfigError(format!("{key}: must be at least {min}, got {v}")))
    } else {
        Ok(())
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let h = &self.heat_sink;
        positive("heat_sink.t_final", h.t_final)?;
        positive("heat_sink.kappa_max", h.kappa_max)?;
        positive("heat_sink.volume_bound", h.volume_bound)?;
        at_least("heat_sink.elements", h.elements, 1)?;
        at_least("heat_sink.degree_x", h.degree_x, 1)?;
        if !(h.kappa_min >= 0.0 && h.kappa_min <= h.kappa_max) {
            return Err(ConfigError(format!(
                "heat_sink.kappa_min: must lie in [0, kappa_max], got {}",
                h.kappa_min
            )));
        }
        if !(h.p >= 1.0) {
            return Err(ConfigError(format!("heat_sink.p: must be at least 1, got {}", h.p)));
        }
        let d = &self.two_domain;
        positive("two_domain.t_final", d.t_final)?;
        positive("two_domain.nominal_kappa", d.nominal_kappa)?;
        positive("two_domain.volume_bound", d.volume_bound)?;
        if !(d.xi > 0.0 && d.xi < 1.0) {
            return Err(ConfigError(format!("two_domain.xi: must lie in (0, 1), got {}", d.xi)));
        }
        let m = &self.manufactured;
        positive("manufactured.t_final", m.t_final)?;
        positive("manufactured.kappa_min", m.kappa_min)?;
        at_least("manufactured.elements", m.elements, 1)?;
        if !(m.b > m.a) {
            return Err(ConfigError("manufactured.b: must exceed manufactured.a".into()));
        }
        positive("optimizer.tau_rho", self.optimizer.tau_rho)?;
        positive("optimizer.tau_j", self.optimizer.tau_j)?;
        at_least("optimizer.max_iters", self.optimizer.max_iters, 1)?;
        if let Some(c) = self.verify.criteria.iter().find(|c| !(1..=8).contains(*c)) {
            return Err(ConfigError(format!("verify.criteria: unknown criterion {c}")));
        }
        nonempty("converge.degrees", &self.converge.degrees)?;
        nonempty("converge.be_runs", &self.converge.be_runs)?;
        nonempty("converge.crossvalidation", &self.converge.crossvalidation)?;
        at_least("converge.n_modes", self.converge.n_modes, 1)?;
        at_least("optimize.nt", self.optimize.nt, 1)?;
        nonempty("compare.solvers", &self.compare.solvers)?;
        nonempty("compare.be_steps", &self.compare.be_steps)?;
        nonempty("compare.st_degrees", &self.compare.st_degrees)?;
        at_least("compare.repetitions", self.compare.repetitions, 1)?;
        Ok(())
    }
}
