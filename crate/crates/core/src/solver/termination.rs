use super::config::{TerminationCriteria, TerminationMode};
use crate::geometry::Ambient;

/// `‖x^k − x^{k−1}‖ / max(‖x^{k−1}‖, 1)` in ambient coordinates.
pub fn relative_change_x(prev: &Ambient, curr: &Ambient) -> f64 {
    curr.sub(prev).norm() / prev.norm().max(1.0)
}

/// `|φ^k − φ^{k−1}| / max(|φ^{k−1}|, 1)`.
pub fn relative_change_phi(prev: f64, curr: f64) -> f64 {
    (curr - prev).abs() / prev.abs().max(1.0)
}

/// Stopping test between two consecutive iterates.
///
/// ```
/// use riemsub::geometry::Ambient;
/// use riemsub::solver::{termination_check, TerminationCriteria, TerminationMode};
///
/// let c = TerminationCriteria { epsilon: 1e-4, mode: TerminationMode::FunctionOnly };
/// let x = Ambient::from_vec(vec![1.0, 2.0]);
/// assert!(termination_check(&x, &x, 3.0, 3.0, &c));
/// assert!(!termination_check(&x, &x, 1.0, 1.001, &c));
/// ```
pub fn termination_check(
    prev_x: &Ambient,
    x: &Ambient,
    prev_phi: f64,
    phi: f64,
    criteria: &TerminationCriteria,
) -> bool {
    let dphi = relative_change_phi(prev_phi, phi);
    match criteria.mode {
        TerminationMode::FunctionOnly => dphi <= criteria.epsilon,
        TerminationMode::EuclideanBoth => dphi.max(relative_change_x(prev_x, x)) <= criteria.epsilon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denominators_use_max_with_one() {
        let prev = Ambient::from_vec(vec![0.5, 0.0]);
        let curr = Ambient::from_vec(vec![0.6, 0.0]);
        assert!((relative_change_x(&prev, &curr) - 0.1).abs() < 1e-15);
        assert!((relative_change_phi(0.5, 0.6) - 0.1).abs() < 1e-15);
        assert!((relative_change_phi(-4.0, -2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn both_mode_needs_small_step() {
        let c = TerminationCriteria { epsilon: 1e-4, mode: TerminationMode::EuclideanBoth };
        let a = Ambient::from_vec(vec![0.0]);
        let b = Ambient::from_vec(vec![1.0]);
        assert!(!termination_check(&a, &b, 2.0, 2.0, &c));
        assert!(termination_check(&a, &a, 2.0, 2.0, &c));
        let f = TerminationCriteria { mode: TerminationMode::FunctionOnly, ..c };
        assert!(termination_check(&a, &b, 2.0, 2.0, &f));
    }
}
