use rand::Rng;

use super::CheckOutcome;
use crate::error::Result;
use crate::geometry::{
    manifold_check, random_ambient, random_point, random_tangent, retract, tangent_project, tangent_residual, Manifold,
    TangentVector,
};

/// Worst-case errors of the retraction and projection over random samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeometryReport {
    pub samples: usize,
    /// `‖R_x(0) − x‖`.
    pub retract_zero: f64,
    /// Membership residual of `R_x(ξ)` for `‖ξ‖` up to 2.
    pub retract_membership: f64,
    /// Largest `‖R_x(tξ) − x − tξ‖ / (t²‖ξ‖²)` over `t ∈ {1e-2, 1e-3}`.
    pub second_order_constant: f64,
    /// Largest `‖(R_x(tξ) − x)/t − ξ‖ / (t‖ξ‖²)` over `t ∈ {1e-3, 1e-4}`.
    pub differential_constant: f64,
    /// `‖P(Pv) − Pv‖ / ‖v‖`.
    pub project_idempotent: f64,
    /// Tangent-space equation residual of `Pv`, relative to `‖v‖`.
    pub project_tangent: f64,
    /// `(‖Pv‖ − ‖v‖)₊ / ‖v‖`.
    pub project_expansion: f64,
    /// `|⟨Pu, v⟩ − ⟨u, Pv⟩| / (‖u‖‖v‖)`.
    pub project_asymmetry: f64,
}

/// Bound used for the fitted retraction constants.
pub const RETRACTION_CONSTANT_BOUND: f64 = 10.0;

impl GeometryReport {
    pub fn outcomes(&self, label: &str) -> Vec<CheckOutcome> {
        let n = self.samples;
        vec![
            CheckOutcome::new(format!("{label}/retract_zero"), self.retract_zero, 1e-12, n),
            CheckOutcome::new(format!("{label}/retract_membership"), self.retract_membership, 1e-10, n),
            CheckOutcome::new(format!("{label}/retract_second_order"), self.second_order_constant, RETRACTION_CONSTANT_BOUND, n),
            CheckOutcome::new(format!("{label}/retract_differential"), self.differential_constant, RETRACTION_CONSTANT_BOUND, n),
            CheckOutcome::new(format!("{label}/project_idempotent"), self.project_idempotent, 1e-12, n),
            CheckOutcome::new(format!("{label}/project_tangent"), self.project_tangent, 1e-10, n),
            CheckOutcome::new(format!("{label}/project_nonexpansive"), self.project_expansion, 1e-12, n),
            CheckOutcome::new(format!("{label}/project_self_adjoint"), self.project_asymmetry, 1e-12, n),
        ]
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes("").iter().all(CheckOutcome::passed)
    }
}

/// Samples `trials` random points and tangent vectors on `manifold`.
pub fn geometry_report<R: Rng + ?Sized>(manifold: &Manifold, trials: usize, rng: &mut R) -> Result<GeometryReport> {
    let mut rep = GeometryReport {
        samples: trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let x = random_point(manifold, rng);
        let xi = random_tangent(&x, rng).scale(rng.random_range(0.1..2.0));
        let xi_sq = xi.dot(&xi);

        let zero = retract(&x, &TangentVector::zero(&x))?;
        rep.retract_zero = rep.retract_zero.max(zero.coords().sub(x.coords()).norm());
        let y = retract(&x, &xi)?;
        rep.retract_membership = rep.retract_membership.max(manifold_check(&y).residual);

        for t in [1e-2, 1e-3] {
            let y = retract(&x, &xi.scale(t))?;
            let mut r = y.coords().sub(x.coords());
            r.axpy(-t, xi.coords());
            rep.second_order_constant = rep.second_order_constant.max(r.norm() / (t * t * xi_sq));
        }
        for t in [1e-3, 1e-4] {
            let y = retract(&x, &xi.scale(t))?;
            let mut q = y.coords().sub(x.coords()).scale(1.0 / t);
            q.axpy(-1.0, xi.coords());
            rep.differential_constant = rep.differential_constant.max(q.norm() / (t * xi_sq));
        }

        let u = random_ambient(manifold, rng);
        let v = random_ambient(manifold, rng);
        let (un, vn) = (u.norm(), v.norm());
        let pv = tangent_project(&x, &v)?;
        let ppv = tangent_project(&x, pv.coords())?;
        rep.project_idempotent = rep.project_idempotent.max(ppv.coords().sub(pv.coords()).norm() / vn);
        rep.project_tangent = rep.project_tangent.max(tangent_residual(&x, &pv) / vn);
        rep.project_expansion = rep.project_expansion.max(((pv.norm() - vn) / vn).max(0.0));
        let pu = tangent_project(&x, &u)?;
        let asym = (pu.coords().dot(&v) - u.dot(pv.coords())).abs() / (un * vn);
        rep.project_asymmetry = rep.project_asymmetry.max(asym);
    }
    Ok(rep)
}
