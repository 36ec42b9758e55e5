//! Nonmonotone subgradient descent on manifolds.
//!
//! Each iteration projects an ambient subgradient onto the tangent space,
//! picks a direction, and backtracks from an initial trial stepsize until
//! `φ(R_x(τd)) ≤ R_k + στ⟨w, d⟩`. The reference value `R_k` is either the
//! current value (monotone), a running convex combination of past values
//! (mean rule), or the maximum over a window (max rule).

mod config;
mod direction;
mod reference;
mod step;
mod termination;
mod trace;

pub use config::{
    DirectionRule, InitStep, PSchedule, ReferenceRule, SolverConfig, TerminationCriteria, TerminationMode,
};
pub use direction::{
    direction_lbfgs, direction_neg_subgradient, Direction, LbfgsMemory, LBFGS_CURVATURE_TOL, LBFGS_MIN_DESCENT,
};
pub use reference::{reference_update_max, reference_update_mean};
pub use step::{adaptive_schedule, initial_step_bb, BB_CURVATURE_TOL};
pub use termination::{relative_change_phi, relative_change_x, termination_check};
pub use trace::{check_trace, InvariantViolation, IterationRecord, SolveResult, SolveStatus, MONOTONE_TOL, SANDWICH_TOL};

use std::time::Instant;

use crate::error::{invalid, Result};
use crate::geometry::{manifold_check, retract, tangent_project, Ambient, ManifoldPoint, TangentVector};
use crate::objectives::Objective;
use reference::MaxWindow;

/// Tangent subgradients at most this long count as zero.
pub const STATIONARITY_TOL: f64 = 1e-12;

/// Runs the method from `x0` until a stopping test fires.
///
/// Oracle failures are returned as errors. Linesearch breakdown, after
/// `max_backtracks` reductions or once a trial step no longer moves the
/// iterate, is reported as [`SolveStatus::LinesearchStalled`] with the trace
/// up to that point.
pub fn solve<O: Objective + ?Sized>(oracle: &O, x0: ManifoldPoint, config: &SolverConfig) -> Result<SolveResult> {
    let start = Instant::now();
    if x0.manifold() != oracle.manifold() {
        return invalid("starting point and objective live on different manifolds");
    }
    let check = manifold_check(&x0);
    if !check.on_manifold {
        return invalid(format!("starting point is off the manifold (residual {:.3e})", check.residual));
    }
    config.validate(oracle.manifold())?;

    let eval0 = oracle.evaluate(&x0)?;
    let mut evaluations = 1;
    let phi_initial = eval0.value;
    if !phi_initial.is_finite() {
        return invalid(format!("objective is {phi_initial} at the starting point"));
    }

    let mut x = x0;
    let mut phi = phi_initial;
    let mut g = eval0.subgradient;
    let mut r = phi_initial;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut window = match config.reference {
        ReferenceRule::Max { window } => Some(MaxWindow::new(window, phi_initial)),
        _ => None,
    };
    let mut lbfgs = match config.direction {
        DirectionRule::LbfgsEuclidean { memory } => Some(LbfgsMemory::new(memory)),
        DirectionRule::NegSubgradient => None,
    };
    let mut p = match (config.reference, config.p_schedule) {
        (ReferenceRule::Monotone, _) => 1.0,
        (_, PSchedule::Constant(p)) => p,
        (_, PSchedule::Adaptive) => config.p_min,
    };
    let mut tau0 = match config.init_step {
        InitStep::Constant(t) => t,
        InitStep::BarzilaiBorwein => config.first_step,
    };
    let mut backtrack_history: Vec<usize> = Vec::new();
    let mut prev: Option<(Ambient, TangentVector)> = None;

    let status = loop {
        let k = trace.len();
        let w = tangent_project(&x, &g)?;
        let w_norm = w.norm();
        if w_norm <= STATIONARITY_TOL {
            break SolveStatus::StationaryZeroSubgradient;
        }
        if k >= config.max_iter {
            break SolveStatus::MaxIter;
        }

        if let (Some(mem), Some((x_prev, w_prev))) = (lbfgs.as_mut(), prev.as_ref()) {
            mem.push(x.coords().sub(x_prev), w.coords().sub(w_prev.coords()));
        }
        let dir = match &lbfgs {
            Some(mem) => direction_lbfgs(&w, mem),
            None => direction_neg_subgradient(&w),
        };
        let d = &dir.d;
        let dir_norm = d.norm();
        let slope = w.dot(d);

        let tau_init = match (config.init_step, prev.as_ref()) {
            (InitStep::BarzilaiBorwein, Some((x_prev, w_prev))) => {
                let dx = x.coords().sub(x_prev);
                initial_step_bb(&dx, w_prev, &w, &x, config.tau_min, config.tau_max)?
            }
            _ => tau0.clamp(config.tau_min, config.tau_max),
        };

        let mut tau = tau_init;
        let mut backtracks = 0;
        let accepted = loop {
            let trial = retract(&x, &d.scale(tau))?;
            if trial.coords() == x.coords() {
                break None;
            }
            let value = oracle.value(&trial)?;
            evaluations += 1;
            if value <= r + config.sigma * tau * slope {
                break Some((trial, value));
            }
            if backtracks == config.max_backtracks {
                break None;
            }
            tau *= config.beta;
            backtracks += 1;
        };
        let Some((x_next, phi_next)) = accepted else {
            break SolveStatus::LinesearchStalled;
        };
        let g_next = oracle.evaluate(&x_next)?.subgradient;
        evaluations += 1;

        let delta = -config.sigma * tau * slope;
        backtrack_history.push(backtracks);
        if config.p_schedule == PSchedule::Adaptive && config.reference != ReferenceRule::Monotone {
            let (p_next, tau0_next) = adaptive_schedule(
                &backtrack_history,
                p,
                tau0,
                config.p_min,
                config.beta,
                config.tau_min,
                config.tau_max,
            );
            p = p_next;
            if matches!(config.init_step, InitStep::Constant(_)) {
                tau0 = tau0_next;
            }
        }
        let (r_next, p_used) = match window.as_mut() {
            Some(win) => (win.push(phi_next), None),
            None => (reference_update_mean(r, phi_next, p), Some(p)),
        };

        let step_norm = x_next.coords().sub(x.coords()).norm();
        trace.push(IterationRecord {
            k,
            phi: phi_next,
            reference: r_next,
            tau,
            tau_init,
            dir_norm,
            w_norm,
            backtracks,
            delta,
            slope,
            p: p_used,
            a: dir.a,
            b: dir.b,
            step_norm,
            time_s: start.elapsed().as_secs_f64(),
        });

        let done = termination_check(x.coords(), x_next.coords(), phi, phi_next, &config.termination);
        let x_prev = std::mem::replace(&mut x, x_next);
        prev = Some((x_prev.into_coords(), w));
        phi = phi_next;
        g = g_next;
        r = r_next;
        if done {
            break SolveStatus::Converged;
        }
    };

    Ok(SolveResult {
        x_final: x,
        phi_final: phi,
        phi_initial,
        status,
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests;
