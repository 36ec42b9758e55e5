//! Numerical self-checks: retraction axioms, finite-difference validation of
//! subgradient oracles, DC identities and a fault-injection wrapper.

mod geometry;
mod oracle;

pub use geometry::{geometry_report, GeometryReport};
pub use oracle::{
    assignment_margin, dc_gradient_residual, dc_identity_residual, fd_subgradient_error, grassmann_invariance_residual,
    random_orthogonal, upper_c2_violations, SignFlipped,
};

use std::fmt;

/// Result of one named numerical check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    /// Largest observed error measure.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, worst: f64, tolerance: f64, samples: usize) -> Self {
        CheckOutcome {
            name: name.into(),
            worst,
            tolerance,
            samples,
        }
    }

    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (tol {:.1e}, n = {})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.samples
        )
    }
}
