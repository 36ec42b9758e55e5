use crate::error::{invalid, Result};
use crate::geometry::Manifold;

/// How the nonmonotonicity parameter `p_{k+1}` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSchedule {
    Constant(f64),
    /// Raise `p` to 1 after two clean linesearches, drop it to `p_min` after
    /// a backtrack. Also adapts the constant initial stepsize.
    Adaptive,
}

/// Reference value `R_k` used in the acceptance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceRule {
    /// `R_k = φ(x^k)`: the classical Armijo rule.
    Monotone,
    /// `R_{k+1} = (1 − p) R_k + p φ(x^{k+1})`.
    Mean,
    /// Maximum of the last `window` objective values.
    Max { window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionRule {
    NegSubgradient,
    /// Limited-memory BFGS; vector spaces only.
    LbfgsEuclidean { memory: usize },
}

/// Initial trial stepsize of each linesearch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitStep {
    Constant(f64),
    /// `⟨Δx, Δx⟩ / ⟨Δx, Δg⟩`; the first iteration uses `SolverConfig::first_step`.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminationMode {
    /// `max(Δrel x, Δrel φ) ≤ ε`; vector spaces only.
    EuclideanBoth,
    /// `Δrel φ ≤ ε`.
    FunctionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationCriteria {
    pub epsilon: f64,
    pub mode: TerminationMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Armijo constant, in (0, 1).
    pub sigma: f64,
    /// Backtracking factor, in (0, 1).
    pub beta: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub p_min: f64,
    pub p_schedule: PSchedule,
    pub reference: ReferenceRule,
    pub direction: DirectionRule,
    pub init_step: InitStep,
    /// Initial trial step of the first Barzilai-Borwein iteration.
    pub first_step: f64,
    pub termination: TerminationCriteria,
    pub max_iter: usize,
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sigma: 1e-4,
            beta: 0.5,
            tau_min: 1e-10,
            tau_max: 1e10,
            p_min: 0.6,
            p_schedule: PSchedule::Constant(0.6),
            reference: ReferenceRule::Mean,
            direction: DirectionRule::NegSubgradient,
            init_step: InitStep::BarzilaiBorwein,
            first_step: 1.0,
            termination: TerminationCriteria {
                epsilon: 1e-4,
                mode: TerminationMode::FunctionOnly,
            },
            max_iter: 1000,
            max_backtracks: 60,
        }
    }
}

impl SolverConfig {
    /// Monotone Armijo linesearch (`p ≡ 1`).
    pub fn monotone() -> Self {
        SolverConfig {
            reference: ReferenceRule::Monotone,
            p_schedule: PSchedule::Constant(1.0),
            p_min: 1.0,
            ..Default::default()
        }
    }

    /// Mean rule with constant `p`.
    pub fn mean(p: f64) -> Self {
        SolverConfig {
            reference: ReferenceRule::Mean,
            p_schedule: PSchedule::Constant(p),
            p_min: p,
            ..Default::default()
        }
    }

    /// Max rule over the last `window` values.
    pub fn max(window: usize) -> Self {
        SolverConfig {
            reference: ReferenceRule::Max { window },
            ..Default::default()
        }
    }

    /// Limited-memory quasi-Newton directions with unit initial step.
    pub fn with_lbfgs(mut self, memory: usize) -> Self {
        self.direction = DirectionRule::LbfgsEuclidean { memory };
        self.init_step = InitStep::Constant(1.0);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.termination.epsilon = epsilon;
        self
    }

    pub fn with_termination(mut self, mode: TerminationMode) -> Self {
        self.termination.mode = mode;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_init_step(mut self, init: InitStep) -> Self {
        self.init_step = init;
        self
    }

    /// Lower bound on `p_{k+1}` implied by the configuration.
    pub fn effective_p_min(&self) -> f64 {
        match (self.reference, self.p_schedule) {
            (ReferenceRule::Monotone, _) => 1.0,
            (_, PSchedule::Constant(p)) => p,
            (_, PSchedule::Adaptive) => self.p_min,
        }
    }

    pub fn validate(&self, manifold: &Manifold) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.sigma) {
            return invalid(format!("sigma must lie in (0,1), got {}", self.sigma));
        }
        if !open_unit(self.beta) {
            return invalid(format!("beta must lie in (0,1), got {}", self.beta));
        }
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_max && self.tau_max.is_finite()) {
            return invalid(format!(
                "need 0 < tau_min <= tau_max < inf, got [{}, {}]",
                self.tau_min, self.tau_max
            ));
        }
        if !(self.p_min > 0.0 && self.p_min <= 1.0) {
            return invalid(format!("p_min must lie in (0,1], got {}", self.p_min));
        }
        if let PSchedule::Constant(p) = self.p_schedule {
            if !(p >= self.p_min && p <= 1.0) {
                return invalid(format!("p = {p} outside [p_min, 1] = [{}, 1]", self.p_min));
            }
        }
        if let ReferenceRule::Max { window } = self.reference {
            if window == 0 {
                return invalid("max-rule window must be positive");
            }
        }
        if let InitStep::Constant(t) = self.init_step {
            if !(t > 0.0 && t.is_finite()) {
                return invalid(format!("initial step must be positive, got {t}"));
            }
        }
        if !(self.first_step > 0.0 && self.first_step.is_finite()) {
            return invalid("first_step must be positive");
        }
        if !(self.termination.epsilon > 0.0) {
            return invalid("epsilon must be positive");
        }
        let linear = manifold.is_linear();
        if let DirectionRule::LbfgsEuclidean { memory } = self.direction {
            if !linear {
                return invalid("L-BFGS directions require a Euclidean domain");
            }
            if memory == 0 {
                return invalid("L-BFGS memory must be positive");
            }
        }
        if self.termination.mode == TerminationMode::EuclideanBoth && !linear {
            return invalid("the iterate-change stopping test requires a Euclidean domain");
        }
        Ok(())
    }
}
