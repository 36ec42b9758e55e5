//! Experiment configuration files (TOML).
//!
//! ```toml
//! repetitions = 5
//! base_seed = 0
//!
//! [[problem]]
//! name = "sphere"
//! objective = "cluster"
//! clusters = 5
//! generate = { family = "vmf_clusters", l = 5, n_per = 1000, ambient_dim = 201, kappa = 10.0, seed = 1 }
//!
//! [[solver]]
//! name = "nonmonotone"
//! reference = "mean"
//! p = 0.6
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use riemsub::geometry::{Manifold, StiefelRetraction};
use riemsub::objectives::DissimilarityKind;
use riemsub::solver::{
    DirectionRule, InitStep, PSchedule, ReferenceRule, SolverConfig, TerminationCriteria, TerminationMode,
};
use riemsub::baselines::{BdcaParams, DcaConfig, InnerSolver};
use riemsub::synthgen::GenSpec;
use serde::Deserialize;

use crate::error::{invalid, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Stopping tolerance applied to every solver without its own.
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default = "one")]
    pub jobs: usize,
    #[serde(default)]
    pub cost: CostMetric,
    #[serde(rename = "problem")]
    pub problems: Vec<ProblemConfig>,
    #[serde(rename = "solver")]
    pub solvers: Vec<SolverEntry>,
}

fn one() -> usize {
    1
}

/// Cost used for performance profiles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMetric {
    #[default]
    Time,
    Iterations,
    Evaluations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Centroid clustering with the dissimilarity of the data manifold.
    Cluster,
    /// Euclidean minimum sum-of-squares clustering.
    Mssc,
    /// Multidimensional scaling.
    Mds,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub objective: ObjectiveKind,
    pub clusters: Option<usize>,
    pub dissimilarity: Option<DissimilarityKind>,
    pub embed_dim: Option<usize>,
    /// CSV file, relative to the configuration file.
    pub dataset: Option<PathBuf>,
    pub generate: Option<GenSpec>,
    /// Offset the generator seed by the repetition index.
    #[serde(default)]
    pub fresh_data_per_rep: bool,
    /// Scale plain CSV rows to unit length and treat them as sphere data.
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Subgradient,
    Dca,
    Bdca,
    SphericalKmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Monotone,
    Mean,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    NegSubgradient,
    Lbfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Bb,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationKind {
    /// Iterate and value change on vector spaces, value change otherwise.
    Auto,
    EuclideanBoth,
    FunctionOnly,
}

/// One named solver. Unset keys take the library defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    pub name: String,
    #[serde(default)]
    pub method: Method,
    pub reference: Option<ReferenceKind>,
    pub p: Option<f64>,
    pub p_schedule: Option<ScheduleKind>,
    pub p_min: Option<f64>,
    pub window: Option<usize>,
    pub direction: Option<DirectionKind>,
    pub memory: Option<usize>,
    pub init_step: Option<InitKind>,
    pub tau0: Option<f64>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_backtracks: Option<usize>,
    pub termination: Option<TerminationKind>,
    pub epsilon: Option<f64>,
    pub retraction: Option<StiefelRetraction>,
    pub rho: Option<f64>,
    pub inner_max_iter: Option<usize>,
    pub lambda_bar: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda_beta: Option<f64>,
}

fn termination_mode(kind: Option<TerminationKind>, manifold: &Manifold) -> TerminationMode {
    match kind.unwrap_or(TerminationKind::Auto) {
        TerminationKind::EuclideanBoth => TerminationMode::EuclideanBoth,
        TerminationKind::FunctionOnly => TerminationMode::FunctionOnly,
        TerminationKind::Auto if manifold.is_linear() => TerminationMode::EuclideanBoth,
        TerminationKind::Auto => TerminationMode::FunctionOnly,
    }
}

impl SolverEntry {
    pub fn epsilon_or(&self, global: Option<f64>) -> f64 {
        self.epsilon.or(global).unwrap_or(1e-4)
    }

    /// Subgradient-method settings for a problem on `manifold`.
    pub fn solver_config(&self, manifold: &Manifold, global_epsilon: Option<f64>) -> CliResult<SolverConfig> {
        let d = SolverConfig::default();
        let reference = match self.reference.unwrap_or(ReferenceKind::Mean) {
            ReferenceKind::Monotone => ReferenceRule::Monotone,
            ReferenceKind::Mean => ReferenceRule::Mean,
            ReferenceKind::Max => ReferenceRule::Max {
                window: self.window.unwrap_or(5),
            },
        };
        let p = self.p.unwrap_or(0.6);
        let p_schedule = match self.p_schedule.unwrap_or(ScheduleKind::Constant) {
            ScheduleKind::Constant => PSchedule::Constant(p),
            ScheduleKind::Adaptive => PSchedule::Adaptive,
        };
        let p_min = match reference {
            ReferenceRule::Monotone => 1.0,
            _ => self.p_min.unwrap_or(p),
        };
        let direction = match self.direction.unwrap_or(DirectionKind::NegSubgradient) {
            DirectionKind::NegSubgradient => DirectionRule::NegSubgradient,
            DirectionKind::Lbfgs => DirectionRule::LbfgsEuclidean {
                memory: self.memory.unwrap_or(5),
            },
        };
        let default_init = match direction {
            DirectionRule::NegSubgradient => InitKind::Bb,
            DirectionRule::LbfgsEuclidean { .. } => InitKind::Constant,
        };
        let init_step = match self.init_step.unwrap_or(default_init) {
            InitKind::Bb => InitStep::BarzilaiBorwein,
            InitKind::Constant => InitStep::Constant(self.tau0.unwrap_or(1.0)),
        };
        let config = SolverConfig {
            sigma: self.sigma.unwrap_or(d.sigma),
            beta: self.beta.unwrap_or(d.beta),
            tau_min: self.tau_min.unwrap_or(d.tau_min),
            tau_max: self.tau_max.unwrap_or(d.tau_max),
            p_min,
            p_schedule: if reference == ReferenceRule::Monotone { PSchedule::Constant(1.0) } else { p_schedule },
            reference,
            direction,
            init_step,
            first_step: self.tau0.unwrap_or(d.first_step),
            termination: TerminationCriteria {
                epsilon: self.epsilon_or(global_epsilon),
                mode: termination_mode(self.termination, manifold),
            },
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            max_backtracks: self.max_backtracks.unwrap_or(d.max_backtracks),
        };
        config
            .validate(manifold)
            .map_err(|e| CliError::Invalid(format!("solver {:?}: {e}", self.name)))?;
        Ok(config)
    }

    pub fn dca_config(&self, manifold: &Manifold, global_epsilon: Option<f64>) -> CliResult<DcaConfig> {
        let d = DcaConfig::default();
        let b = BdcaParams::default();
        let config = DcaConfig {
            rho: self.rho.unwrap_or(d.rho),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            epsilon: self.epsilon_or(global_epsilon),
            mode: termination_mode(self.termination, manifold),
            inner: self.inner_max_iter.map_or(InnerSolver::ClosedForm, InnerSolver::InnerDescent),
            bdca: (self.method == Method::Bdca).then(|| BdcaParams {
                lambda_bar: self.lambda_bar.unwrap_or(b.lambda_bar),
                alpha: self.alpha.unwrap_or(b.alpha),
                beta: self.lambda_beta.unwrap_or(b.beta),
                max_backtracks: self.max_backtracks.unwrap_or(b.max_backtracks),
            }),
        };
        config
            .validate()
            .map_err(|e| CliError::Invalid(format!("solver {:?}: {e}", self.name)))?;
        Ok(config)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Invalid(format!("configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a configuration file; dataset paths become relative to its
    /// directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut config.problems {
            if let Some(d) = &p.dataset {
                if d.is_relative() {
                    p.dataset = Some(base.join(d));
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1");
        }
        if self.jobs == 0 {
            return invalid("jobs must be at least 1");
        }
        if self.problems.is_empty() || self.solvers.is_empty() {
            return invalid("need at least one [[problem]] and one [[solver]]");
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return invalid("epsilon must be positive");
            }
        }
        let mut names = HashSet::new();
        for s in &self.solvers {
            if !names.insert(&s.name) {
                return invalid(format!("duplicate solver name {:?}", s.name));
            }
            if s.name.is_empty() || s.name.contains(['/', ',', '\\']) {
                return invalid(format!("solver name {:?} must be non-empty without '/', '\\' or ','", s.name));
            }
        }
        let mut names = HashSet::new();
        for p in &self.problems {
            if !names.insert(&p.name) {
                return invalid(format!("duplicate problem name {:?}", p.name));
            }
            if p.name.is_empty() || p.name.contains(['/', ',', '\\']) {
                return invalid(format!("problem name {:?} must be non-empty without '/', '\\' or ','", p.name));
            }
            match (&p.dataset, &p.generate) {
                (Some(_), None) | (None, Some(_)) => {}
                _ => return invalid(format!("problem {:?} needs exactly one of dataset or generate", p.name)),
            }
            if let Some(g) = &p.generate {
                g.validate().map_err(|e| CliError::Invalid(format!("problem {:?}: {e}", p.name)))?;
            }
            match p.objective {
                ObjectiveKind::Cluster | ObjectiveKind::Mssc if p.clusters.unwrap_or(0) == 0 => {
                    return invalid(format!("problem {:?} needs clusters >= 1", p.name));
                }
                ObjectiveKind::Mds if p.embed_dim.is_some_and(|d| d == 0) => {
                    return invalid(format!("problem {:?}: embed_dim must be positive", p.name));
                }
                _ => {}
            }
            for s in &self.solvers {
                let ok = match s.method {
                    Method::Subgradient => true,
                    Method::Dca | Method::Bdca => matches!(p.objective, ObjectiveKind::Mssc | ObjectiveKind::Mds),
                    Method::SphericalKmeans => p.objective == ObjectiveKind::Cluster,
                };
                if !ok {
                    return invalid(format!("solver {:?} cannot run on problem {:?}", s.name, p.name));
                }
            }
        }
        Ok(())
    }
}
