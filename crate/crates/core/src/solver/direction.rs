use std::collections::VecDeque;

use crate::geometry::{Ambient, TangentVector};

/// Cautious-update threshold on `⟨s, y⟩ / (‖s‖‖y‖)`.
pub const LBFGS_CURVATURE_TOL: f64 = 1e-10;
/// Quasi-Newton directions with `a_k` below this are replaced by `−w`.
pub const LBFGS_MIN_DESCENT: f64 = 1e-8;

/// A search direction with the constants `a_k = −⟨w, d⟩/‖d‖²` and
/// `b_k = ‖w‖/‖d‖`.
#[derive(Debug, Clone)]
pub struct Direction {
    pub d: TangentVector,
    pub a: f64,
    pub b: f64,
    /// The quasi-Newton direction was rejected in favour of `−w`.
    pub fell_back: bool,
}

impl Direction {
    fn measured(w: &TangentVector, d: TangentVector, fell_back: bool) -> Self {
        let dd = d.dot(&d);
        let a = -w.dot(&d) / dd;
        let b = w.norm() / dd.sqrt();
        Direction { d, a, b, fell_back }
    }
}

/// `d = −w`, for which `a_k = b_k = 1`.
pub fn direction_neg_subgradient(w: &TangentVector) -> Direction {
    Direction {
        d: w.scale(-1.0),
        a: 1.0,
        b: 1.0,
        fell_back: false,
    }
}

/// Curvature pairs `(s, y)` for the two-loop recursion.
#[derive(Debug, Clone)]
pub struct LbfgsMemory {
    capacity: usize,
    pairs: VecDeque<(Ambient, Ambient, f64)>,
}

impl LbfgsMemory {
    pub fn new(capacity: usize) -> Self {
        LbfgsMemory {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stores the pair unless `⟨s, y⟩ ≤ tol·‖s‖‖y‖`. Returns whether it was kept.
    pub fn push(&mut self, s: Ambient, y: Ambient) -> bool {
        let sy = s.dot(&y);
        if !(sy > LBFGS_CURVATURE_TOL * s.norm() * y.norm()) {
            return false;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// `H w` by the two-loop recursion with `H₀ = γ I`.
    pub fn apply_inverse_hessian(&self, w: &Ambient) -> Ambient {
        let mut q = w.clone();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let alpha = rho * s.dot(&q);
            q.axpy(-alpha, y);
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            q.scale_mut(s.dot(y) / y.norm_squared());
        }
        for ((s, y, rho), alpha) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * y.dot(&q);
            q.axpy(alpha - beta, s);
        }
        q
    }
}

/// `d = −H w` from the stored pairs, replaced by `−w` if `a_k` drops below
/// [`LBFGS_MIN_DESCENT`].
pub fn direction_lbfgs(w: &TangentVector, memory: &LbfgsMemory) -> Direction {
    if memory.is_empty() {
        return direction_neg_subgradient(w);
    }
    let mut hw = memory.apply_inverse_hessian(w.coords());
    hw.scale_mut(-1.0);
    let dir = Direction::measured(w, TangentVector::from_tangent_coords(hw), false);
    if dir.a.is_finite() && dir.a >= LBFGS_MIN_DESCENT && dir.b.is_finite() {
        dir
    } else {
        Direction {
            fell_back: true,
            ..direction_neg_subgradient(w)
        }
    }
}
