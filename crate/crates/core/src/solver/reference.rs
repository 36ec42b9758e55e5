use std::collections::VecDeque;

/// Mean-rule update `R_{k+1} = (1 − p) R_k + p φ(x^{k+1})`.
///
/// ```
/// use riemsub::solver::reference_update_mean;
/// assert_eq!(reference_update_mean(10.0, 5.0, 0.6), 7.0);
/// assert_eq!(reference_update_mean(10.0, 5.0, 1.0), 5.0);
/// ```
pub fn reference_update_mean(r_k: f64, phi_next: f64, p_next: f64) -> f64 {
    if p_next == 1.0 {
        phi_next
    } else {
        (1.0 - p_next) * r_k + p_next * phi_next
    }
}

/// Maximum over the most recent `min(len, m)` values of `window`.
///
/// Panics on an empty window or `m == 0`.
pub fn reference_update_max(window: &[f64], m: usize) -> f64 {
    assert!(!window.is_empty() && m > 0, "max rule needs a non-empty window");
    window[window.len().saturating_sub(m)..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Ring buffer of the last `m` objective values.
#[derive(Debug, Clone)]
pub(crate) struct MaxWindow {
    values: VecDeque<f64>,
    m: usize,
}

impl MaxWindow {
    pub(crate) fn new(m: usize, phi0: f64) -> Self {
        let mut values = VecDeque::with_capacity(m);
        values.push_back(phi0);
        MaxWindow { values, m }
    }

    pub(crate) fn push(&mut self, phi: f64) -> f64 {
        if self.values.len() == self.m {
            self.values.pop_front();
        }
        self.values.push_back(phi);
        reference_update_max(self.values.make_contiguous(), self.m)
    }
}
