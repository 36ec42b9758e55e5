use crate::geometry::{tangent_project, Ambient, ManifoldPoint, TangentVector};
use crate::error::Result;

/// Curvature below which the Barzilai-Borwein quotient falls back to `τ_max`.
pub const BB_CURVATURE_TOL: f64 = 1e-18;

/// Barzilai-Borwein type initial stepsize `⟨Δx, Δx⟩ / ⟨Δx, Δg⟩`, clamped to
/// `[tau_min, tau_max]`.
///
/// `dx = x^k − x^{k−1}` in ambient coordinates; `Δg = w_curr − proj(w_prev)`
/// with `w_prev` projected onto the tangent space at `x_curr`.
pub fn initial_step_bb(
    dx: &Ambient,
    w_prev: &TangentVector,
    w_curr: &TangentVector,
    x_curr: &ManifoldPoint,
    tau_min: f64,
    tau_max: f64,
) -> Result<f64> {
    let transported = tangent_project(x_curr, w_prev.coords())?;
    let dg = w_curr.coords().sub(transported.coords());
    let ss = dx.norm_squared();
    let sy = dx.dot(&dg);
    if !(sy > BB_CURVATURE_TOL * ss) {
        return Ok(tau_max);
    }
    Ok((ss / sy).clamp(tau_min, tau_max))
}

/// Self-adaptive update of `(p, τ₀)` from the backtrack counts of past
/// linesearches, most recent last.
///
/// Two consecutive zero-backtrack linesearches raise `τ₀` by `1/β` and set
/// `p = 1`; a backtrack in the latest one shrinks `τ₀` by `β` and sets
/// `p = p_min`.
pub fn adaptive_schedule(
    backtracks: &[usize],
    p: f64,
    tau0: f64,
    p_min: f64,
    beta: f64,
    tau_min: f64,
    tau_max: f64,
) -> (f64, f64) {
    match backtracks {
        [.., last] if *last > 0 => (p_min, (beta * tau0).max(tau_min)),
        [.., 0, 0] => (1.0, (tau0 / beta).min(tau_max)),
        _ => (p.clamp(p_min, 1.0), tau0),
    }
}
