use std::fmt;

use super::config::{ReferenceRule, SolverConfig};
use crate::geometry::ManifoldPoint;

/// One accepted iteration `x^k → x^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `φ(x^{k+1})`.
    pub phi: f64,
    /// `R_{k+1}`.
    pub reference: f64,
    /// Accepted stepsize `τ_k`.
    pub tau: f64,
    /// First trial stepsize of the linesearch.
    pub tau_init: f64,
    pub dir_norm: f64,
    pub w_norm: f64,
    pub backtracks: usize,
    /// `δ_k = −σ τ_k ⟨w, d⟩`.
    pub delta: f64,
    /// `⟨w, d⟩`.
    pub slope: f64,
    /// `p_{k+1}`; `None` under the max rule.
    pub p: Option<f64>,
    pub a: f64,
    pub b: f64,
    /// Ambient distance `‖x^{k+1} − x^k‖`.
    pub step_norm: f64,
    /// Seconds since the solve started.
    pub time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    StationaryZeroSubgradient,
    LinesearchStalled,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::StationaryZeroSubgradient => "stationary",
            SolveStatus::LinesearchStalled => "linesearch_stalled",
        }
    }

    /// Whether the run ended by a stopping test rather than a failure.
    pub fn is_success(&self) -> bool {
        matches!(self, SolveStatus::Converged | SolveStatus::StationaryZeroSubgradient)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_final: ManifoldPoint,
    pub phi_final: f64,
    /// `φ(x⁰) = R₀`.
    pub phi_initial: f64,
    pub status: SolveStatus,
    pub trace: Vec<IterationRecord>,
    /// Number of objective value evaluations, linesearch trials included.
    pub evaluations: usize,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// `R_k` before iteration `k`.
    pub fn reference_before(&self, k: usize) -> f64 {
        if k == 0 {
            self.phi_initial
        } else {
            self.trace[k - 1].reference
        }
    }
}

/// A trace entry that breaks one of the solver's guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub k: usize,
    pub name: &'static str,
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}: {}: {}", self.k, self.name, self.detail)
    }
}

pub const SANDWICH_TOL: f64 = 1e-10;
pub const MONOTONE_TOL: f64 = 1e-12;

/// Re-checks the linesearch and reference-value guarantees on a finished run.
///
/// The sandwich bounds and the averaged step bound only hold for the mean
/// rule (and its monotone special case); under the max rule the remaining
/// checks are applied.
pub fn check_trace(result: &SolveResult, config: &SolverConfig) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let mut fail = |k: usize, name: &'static str, detail: String| {
        out.push(InvariantViolation { k, name, detail })
    };
    let mean_like = !matches!(config.reference, ReferenceRule::Max { .. });
    let p_min = config.effective_p_min();
    let r0 = result.phi_initial;
    let mut min_step_sq = f64::INFINITY;
    let mut a_min = f64::INFINITY;

    for (k, rec) in result.trace.iter().enumerate() {
        let r_k = result.reference_before(k);
        let bound = r_k + config.sigma * rec.tau * rec.slope;
        if !(rec.phi <= bound) {
            fail(k, "acceptance", format!("phi {} > {}", rec.phi, bound));
        }
        if !(rec.delta >= 0.0) {
            fail(k, "delta_nonnegative", format!("delta {}", rec.delta));
        }
        let lower = config.sigma * rec.a * rec.tau * rec.dir_norm * rec.dir_norm;
        if !(rec.delta >= lower - 1e-10 * lower.abs()) {
            fail(k, "delta_lower_bound", format!("delta {} < {}", rec.delta, lower));
        }
        if rec.backtracks > config.max_backtracks {
            fail(k, "backtracks_bounded", format!("{} backtracks", rec.backtracks));
        }
        let mono_tol = MONOTONE_TOL * r_k.abs().max(1.0);
        if !(rec.reference <= r_k + mono_tol) {
            fail(k, "reference_nonincreasing", format!("R {} > {}", rec.reference, r_k));
        }
        if !(rec.reference >= rec.phi - SANDWICH_TOL) {
            fail(k, "reference_dominates", format!("R {} < phi {}", rec.reference, rec.phi));
        }
        if !(rec.step_norm > 0.0) {
            fail(k, "iterate_moves", "x^{k+1} = x^k".into());
        }
        if !mean_like {
            continue;
        }
        let Some(p) = rec.p else {
            fail(k, "p_recorded", "missing p under the mean rule".into());
            continue;
        };
        if !(p >= p_min && p <= 1.0) {
            fail(k, "p_range", format!("p {p} outside [{p_min}, 1]"));
        }
        let lo = rec.phi + (1.0 - p) * rec.delta;
        let hi = r_k - p * rec.delta;
        if !(lo <= rec.reference + SANDWICH_TOL) {
            fail(k, "sandwich_lower", format!("{} > R {}", lo, rec.reference));
        }
        if !(rec.reference <= hi + SANDWICH_TOL) {
            fail(k, "sandwich_upper", format!("R {} > {}", rec.reference, hi));
        }
        min_step_sq = min_step_sq.min((rec.tau * rec.dir_norm).powi(2));
        a_min = a_min.min(rec.a);
        let decrease = r0 - rec.reference + MONOTONE_TOL * r0.abs().max(1.0);
        let rhs = decrease * config.tau_max / ((k + 1) as f64 * p_min * config.sigma * a_min);
        if !(min_step_sq <= rhs) {
            fail(k, "average_step_bound", format!("{min_step_sq} > {rhs}"));
        }
    }
    out
}
