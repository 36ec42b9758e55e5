use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Ambient, ManifoldPoint};
use crate::objectives::DcObjective;
use crate::solver::{
    relative_change_phi, relative_change_x, IterationRecord, SolveResult, SolveStatus, TerminationMode,
};

/// How the convex subproblem `min g(x) − ⟨y, x⟩` is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolver {
    /// Exact minimizer of the quadratic `g`.
    ClosedForm,
    /// Gradient descent with Armijo backtracking, at most this many steps.
    InnerDescent(usize),
}

/// Linesearch along the DCA displacement `d = ŷ − x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdcaParams {
    pub lambda_bar: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Reductions of `λ` tried before falling back to `λ = 0`.
    pub max_backtracks: usize,
}

impl Default for BdcaParams {
    fn default() -> Self {
        BdcaParams {
            lambda_bar: 2.0,
            alpha: 1e-4,
            beta: 0.5,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcaConfig {
    pub rho: f64,
    pub max_iter: usize,
    pub epsilon: f64,
    pub mode: TerminationMode,
    pub inner: InnerSolver,
    pub bdca: Option<BdcaParams>,
}

impl Default for DcaConfig {
    fn default() -> Self {
        DcaConfig {
            rho: 1e-3,
            max_iter: 1000,
            epsilon: 1e-4,
            mode: TerminationMode::EuclideanBoth,
            inner: InnerSolver::ClosedForm,
            bdca: None,
        }
    }
}

impl DcaConfig {
    pub fn boosted(mut self) -> Self {
        self.bdca.get_or_insert_with(BdcaParams::default);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return invalid(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.epsilon > 0.0) {
            return invalid("epsilon must be positive");
        }
        if self.inner == InnerSolver::InnerDescent(0) {
            return invalid("inner descent needs at least one step");
        }
        if let Some(b) = &self.bdca {
            if !(b.lambda_bar > 0.0 && b.alpha > 0.0 && b.alpha < 1.0 && b.beta > 0.0 && b.beta < 1.0) {
                return invalid(format!("BDCA parameters out of range: {b:?}"));
            }
        }
        Ok(())
    }
}

/// Relative slack allowed on the DCA descent property.
const DESCENT_TOL: f64 = 1e-10;

/// One DCA step: `y ∈ ∂h(x)`, then the minimizer of `g − ⟨y, ·⟩`.
///
/// Returns the new point and `‖∇g(x) − y‖`, the criticality measure at `x`.
pub fn dca_step<O: DcObjective + ?Sized>(oracle: &O, x: &Ambient, rho: f64, inner: InnerSolver) -> Result<(Ambient, f64)> {
    let c = oracle.dc_components(x, rho)?;
    let criticality = c.g_gradient.sub(&c.h_subgradient).norm();
    let next = match inner {
        InnerSolver::ClosedForm => oracle.dc_subproblem_argmin(&c.h_subgradient, rho)?,
        InnerSolver::InnerDescent(max_steps) => inner_descent(oracle, x, &c.h_subgradient, rho, max_steps)?,
    };
    if !next.is_finite() {
        return Err(Error::InnerSolver("subproblem solution is not finite".into()));
    }
    Ok((next, criticality))
}

fn inner_descent<O: DcObjective + ?Sized>(oracle: &O, x0: &Ambient, y: &Ambient, rho: f64, max_steps: usize) -> Result<Ambient> {
    let q = |z: &Ambient| -> Result<(f64, Ambient)> {
        let (g, grad) = oracle.g_value_gradient(z, rho)?;
        Ok((g - y.dot(z), grad.sub(y)))
    };
    let mut z = x0.clone();
    let (mut val, mut grad) = q(&z)?;
    let mut tau = 1.0;
    let tol = 1e-10 * y.norm().max(1.0);
    for _ in 0..max_steps {
        let gn2 = grad.norm_squared();
        if gn2.sqrt() <= tol {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = z.clone();
            trial.axpy(-tau, &grad);
            let (tv, tg) = q(&trial)?;
            if tv <= val - 1e-4 * tau * gn2 {
                accepted = Some((trial, tv, tg));
                break;
            }
            tau *= 0.5;
        }
        let Some((nz, nv, ng)) = accepted else { break };
        z = nz;
        val = nv;
        grad = ng;
        tau *= 2.0;
    }
    Ok(z)
}

/// Classical DCA.
///
/// Stops when the relative change of the objective (and, in
/// `EuclideanBoth` mode, of the iterate) drops below `epsilon`. Returns an
/// [`Error::InnerSolver`] if a step increases the objective, which signals an
/// inexact subproblem solve.
pub fn dca_solve<O: DcObjective + ?Sized>(oracle: &O, x0: ManifoldPoint, config: &DcaConfig) -> Result<SolveResult> {
    let config = DcaConfig { bdca: None, ..config.clone() };
    run(oracle, x0, &config)
}

/// DCA with an extrapolating linesearch along `d = ŷ − x`: the largest
/// `λ ∈ {λ̄, λ̄β, …}` with `φ(ŷ + λd) ≤ φ(ŷ) − α λ² ‖d‖²` is taken, `λ = 0`
/// if none qualifies.
pub fn bdca_solve<O: DcObjective + ?Sized>(oracle: &O, x0: ManifoldPoint, config: &DcaConfig) -> Result<SolveResult> {
    run(oracle, x0, &config.clone().boosted())
}

fn run<O: DcObjective + ?Sized>(oracle: &O, x0: ManifoldPoint, config: &DcaConfig) -> Result<SolveResult> {
    let start = Instant::now();
    config.validate()?;
    if x0.manifold() != oracle.manifold() || !x0.manifold().is_linear() {
        return invalid("DCA needs a starting point in the objective's vector space");
    }
    let manifold = x0.manifold().clone();
    let point = |coords: Ambient| ManifoldPoint::new_unchecked(manifold.clone(), coords);
    let value = |coords: &Ambient| -> Result<f64> { oracle.value(&point(coords.clone())?) };

    let phi_initial = oracle.value(&x0)?;
    let mut evaluations = 1;
    let mut x = x0.into_coords();
    let mut phi = phi_initial;
    let mut trace = Vec::new();

    let status = loop {
        let k = trace.len();
        if k >= config.max_iter {
            break SolveStatus::MaxIter;
        }
        let (y_hat, criticality) = dca_step(oracle, &x, config.rho, config.inner)?;
        let phi_hat = value(&y_hat)?;
        evaluations += 1;
        ensure_descent(k, phi, phi_hat)?;

        let (mut x_next, mut phi_next, mut lambda, mut backtracks) = (y_hat.clone(), phi_hat, 0.0, 0);
        if let Some(b) = &config.bdca {
            let d = y_hat.sub(&x);
            let dd = d.norm_squared();
            if dd > 0.0 {
                let mut lam = b.lambda_bar;
                for tries in 0..=b.max_backtracks {
                    let mut trial = y_hat.clone();
                    trial.axpy(lam, &d);
                    let v = value(&trial)?;
                    evaluations += 1;
                    if v <= phi_hat - b.alpha * lam * lam * dd {
                        x_next = trial;
                        phi_next = v;
                        lambda = lam;
                        backtracks = tries;
                        break;
                    }
                    backtracks = tries + 1;
                    lam *= b.beta;
                }
            }
        }

        let step_norm = x_next.sub(&x).norm();
        let dphi = relative_change_phi(phi, phi_next);
        let dx = relative_change_x(&x, &x_next);
        trace.push(IterationRecord {
            k,
            phi: phi_next,
            reference: phi_next,
            tau: lambda,
            tau_init: config.bdca.map_or(0.0, |b| b.lambda_bar),
            dir_norm: y_hat.sub(&x).norm(),
            w_norm: criticality,
            backtracks,
            delta: phi - phi_next,
            slope: 0.0,
            p: Some(1.0),
            a: 1.0,
            b: 1.0,
            step_norm,
            time_s: start.elapsed().as_secs_f64(),
        });
        x = x_next;
        phi = phi_next;
        let done = match config.mode {
            TerminationMode::FunctionOnly => dphi <= config.epsilon,
            TerminationMode::EuclideanBoth => dphi.max(dx) <= config.epsilon,
        };
        if done {
            break SolveStatus::Converged;
        }
    };

    Ok(SolveResult {
        x_final: point(x)?,
        phi_final: phi,
        phi_initial,
        status,
        trace,
        evaluations,
    })
}

fn ensure_descent(k: usize, before: f64, after: f64) -> Result<()> {
    if after <= before + DESCENT_TOL * before.abs().max(1.0) {
        Ok(())
    } else {
        Err(Error::InnerSolver(format!(
            "DCA step {k} increased the objective from {before} to {after}"
        )))
    }
}
