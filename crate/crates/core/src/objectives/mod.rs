//! Objective functions with value and (ambient) subgradient oracles.
//!
//! Oracles return subgradients of the ambient extension of the objective.
//! The solver projects them onto the tangent space of the current iterate.

mod cluster;
mod dataset;
mod mds;

pub use cluster::{
    assign, dissimilarity, manifold_cluster_eval, mssc_dc_components, mssc_eval, ClusterObjective, DissimilarityKind,
    Mssc,
};
pub use dataset::LabeledDataset;
pub use mds::{mds_dc_components, mds_eval, Mds};

use crate::error::Result;
use crate::geometry::{Ambient, Manifold, ManifoldPoint};

/// Objective value together with one ambient subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    pub subgradient: Ambient,
}

/// A locally Lipschitz objective on a manifold with a subgradient oracle.
pub trait Objective: Sync {
    /// Domain of the objective.
    fn manifold(&self) -> &Manifold;

    fn value(&self, x: &ManifoldPoint) -> Result<f64> {
        Ok(self.evaluate(x)?.value)
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn manifold(&self) -> &Manifold {
        (**self).manifold()
    }

    fn value(&self, x: &ManifoldPoint) -> Result<f64> {
        (**self).value(x)
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation> {
        (**self).evaluate(x)
    }
}

/// The two convex pieces of a DC decomposition, evaluated at one point.
///
/// The objective is recovered as `scale * (g - h) + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcComponents {
    pub g_value: f64,
    pub g_gradient: Ambient,
    pub h_value: f64,
    pub h_subgradient: Ambient,
    pub scale: f64,
    pub constant: f64,
}

impl DcComponents {
    pub fn objective_value(&self) -> f64 {
        self.scale * (self.g_value - self.h_value) + self.constant
    }
}

/// Objectives on a vector space that admit a DC splitting `g - h` with a
/// quadratic `g`.
pub trait DcObjective: Objective {
    fn dc_components(&self, x: &Ambient, rho: f64) -> Result<DcComponents>;

    /// Minimizer of `g(x) - ⟨y, x⟩`.
    fn dc_subproblem_argmin(&self, y: &Ambient, rho: f64) -> Result<Ambient>;

    /// Value and gradient of `g` alone.
    fn g_value_gradient(&self, x: &Ambient, rho: f64) -> Result<(f64, Ambient)> {
        let c = self.dc_components(x, rho)?;
        Ok((c.g_value, c.g_gradient))
    }
}

/// Index of the smallest entry, lowest index on ties.
pub(crate) fn argmin_lowest(values: impl IntoIterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if i == 0 || v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Objective given by a closure returning the value and an ambient
/// subgradient.
///
/// ```
/// use riemsub::geometry::{Ambient, Manifold, ManifoldPoint};
/// use riemsub::objectives::{FnObjective, Objective};
///
/// let m = Manifold::euclidean(2).unwrap();
/// let f = FnObjective::new(m.clone(), |x: &Ambient| (x.norm_squared(), x.scale(2.0)));
/// let x = ManifoldPoint::new(m, Ambient::from_vec(vec![1.0, 2.0])).unwrap();
/// assert_eq!(f.value(&x).unwrap(), 5.0);
/// ```
pub struct FnObjective<F> {
    manifold: Manifold,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&Ambient) -> (f64, Ambient) + Sync,
{
    pub fn new(manifold: Manifold, f: F) -> Self {
        FnObjective { manifold, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&Ambient) -> (f64, Ambient) + Sync,
{
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation> {
        let (value, subgradient) = (self.f)(x.coords());
        Ok(ObjectiveEvaluation { value, subgradient })
    }
}
