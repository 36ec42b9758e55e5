//! Embedded submanifolds of Euclidean spaces.
//!
//! Every manifold here is a product of one or more *factors*: Euclidean
//! space, the unit sphere, the Stiefel manifold `St(p, n) = {X ∈ ℝⁿˣᵖ : XᵀX = I}`
//! or the Grassmannian represented by Stiefel matrices. Points and tangent
//! vectors are tuples of dense matrices in ambient coordinates; the metric is
//! the Euclidean (Frobenius) one inherited from the ambient space, so tangent
//! projections are orthogonal projections.
//!
//! Grassmann points are stored as orthonormal representatives `U` of the
//! subspace; the projector `UUᵀ` is never formed. Optimization over them runs
//! on the Stiefel manifold, which is correct as long as the objective is
//! invariant under `U ↦ UQ` for orthogonal `Q`.

mod ambient;
pub mod linalg;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dimension, invalid, Error, Result};
pub use ambient::Ambient;

/// Membership tolerance of [`manifold_check`].
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Tolerance for freshly constructed points and projected tangent vectors.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

/// One factor of a (product) manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Euclidean { dim: usize },
    /// Unit sphere in `ℝ^ambient_dim`.
    Sphere { ambient_dim: usize },
    /// `n × p` matrices with orthonormal columns.
    Stiefel { n: usize, p: usize },
    /// `p`-dimensional subspaces of `ℝⁿ`, stored as Stiefel representatives.
    GrassmannStiefel { n: usize, p: usize },
}

impl Factor {
    fn validate(&self) -> Result<()> {
        match *self {
            Factor::Euclidean { dim } if dim == 0 => invalid("Euclidean dimension must be positive"),
            Factor::Sphere { ambient_dim } if ambient_dim < 2 => {
                invalid("sphere requires ambient dimension >= 2")
            }
            Factor::Stiefel { n, p } | Factor::GrassmannStiefel { n, p } if p == 0 || n < p => {
                invalid(format!("matrix manifold requires n >= p >= 1, got n={n}, p={p}"))
            }
            _ => Ok(()),
        }
    }

    /// Shape of the ambient array of this factor.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            Factor::Euclidean { dim } => (dim, 1),
            Factor::Sphere { ambient_dim } => (ambient_dim, 1),
            Factor::Stiefel { n, p } | Factor::GrassmannStiefel { n, p } => (n, p),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Factor::Euclidean { .. })
    }

    fn residual(&self, x: &DMatrix<f64>) -> f64 {
        match self {
            Factor::Euclidean { .. } => 0.0,
            Factor::Sphere { .. } => (x.norm() - 1.0).abs(),
            Factor::Stiefel { .. } | Factor::GrassmannStiefel { .. } => {
                let p = x.ncols();
                (x.transpose() * x - DMatrix::<f64>::identity(p, p)).norm()
            }
        }
    }

    fn tangent_residual(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        match self {
            Factor::Euclidean { .. } => 0.0,
            Factor::Sphere { .. } => x.dot(v).abs(),
            Factor::Stiefel { .. } | Factor::GrassmannStiefel { .. } => {
                let xtv = x.transpose() * v;
                (&xtv + xtv.transpose()).norm()
            }
        }
    }

    fn project(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Factor::Euclidean { .. } => v.clone(),
            // (I - xxᵀ) v
            Factor::Sphere { .. } => v - x * x.dot(v),
            // (I - XXᵀ) V + ½ X (XᵀV - VᵀX)  =  V - X sym(XᵀV)
            Factor::Stiefel { .. } | Factor::GrassmannStiefel { .. } => {
                v - x * linalg::sym(&(x.transpose() * v))
            }
        }
    }

    fn retract(&self, x: &DMatrix<f64>, xi: &DMatrix<f64>, kind: StiefelRetraction) -> DMatrix<f64> {
        match self {
            Factor::Euclidean { .. } => x + xi,
            Factor::Sphere { .. } => {
                let y = x + xi;
                let n = y.norm();
                y / n
            }
            Factor::Stiefel { .. } | Factor::GrassmannStiefel { .. } => {
                if xi.iter().all(|v| *v == 0.0) {
                    return x.clone();
                }
                let y = x + xi;
                match kind {
                    // The Gram matrix of X + ξ equals I + ξᵀξ for tangent ξ; it
                    // is formed directly so rounding in ξ cannot leak into XᵀX.
                    StiefelRetraction::Polar => linalg::polar_factor(&y),
                    StiefelRetraction::Qr => linalg::qr_factor(&y),
                }
            }
        }
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        let (rows, cols) = self.shape();
        loop {
            let g = linalg::gaussian_matrix(rows, cols, rng);
            let out = match self {
                Factor::Euclidean { .. } => g,
                Factor::Sphere { .. } => {
                    let n = g.norm();
                    if n < 1e-12 {
                        continue;
                    }
                    g / n
                }
                Factor::Stiefel { .. } | Factor::GrassmannStiefel { .. } => linalg::qr_factor(&g),
            };
            if self.residual(&out) <= CONSTRUCTION_TOL {
                return out;
            }
        }
    }
}

/// Retraction used on Stiefel and Grassmann factors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StiefelRetraction {
    /// `(X + ξ)(I + ξᵀξ)^{-1/2}`
    #[default]
    Polar,
    /// Q factor of `X + ξ` with positive diagonal R.
    Qr,
}

/// Descriptor of a manifold: a non-empty, flat list of factors.
///
/// A single-factor manifold and a one-component product are the same thing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ManifoldRepr")]
pub struct Manifold {
    factors: Vec<Factor>,
    #[serde(default)]
    retraction: StiefelRetraction,
}

#[derive(Deserialize)]
struct ManifoldRepr {
    factors: Vec<Factor>,
    #[serde(default)]
    retraction: StiefelRetraction,
}

impl TryFrom<ManifoldRepr> for Manifold {
    type Error = Error;

    fn try_from(r: ManifoldRepr) -> Result<Self> {
        Ok(Manifold::from_factors(r.factors)?.with_retraction(r.retraction))
    }
}

impl Manifold {
    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("manifold needs at least one factor");
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Manifold {
            factors,
            retraction: StiefelRetraction::default(),
        })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::from_factors(vec![Factor::Euclidean { dim }])
    }

    pub fn sphere(ambient_dim: usize) -> Result<Self> {
        Self::from_factors(vec![Factor::Sphere { ambient_dim }])
    }

    pub fn stiefel(n: usize, p: usize) -> Result<Self> {
        Self::from_factors(vec![Factor::Stiefel { n, p }])
    }

    pub fn grassmann(n: usize, p: usize) -> Result<Self> {
        Self::from_factors(vec![Factor::GrassmannStiefel { n, p }])
    }

    /// Cartesian product; nested products are flattened.
    pub fn product(components: Vec<Manifold>) -> Result<Self> {
        let retraction = components
            .first()
            .map(|m| m.retraction)
            .unwrap_or_default();
        let factors = components.into_iter().flat_map(|m| m.factors).collect();
        Ok(Self::from_factors(factors)?.with_retraction(retraction))
    }

    /// `M × M × … × M` with `copies` factors.
    pub fn power(&self, copies: usize) -> Result<Self> {
        Self::product(vec![self.clone(); copies])
    }

    pub fn with_retraction(mut self, retraction: StiefelRetraction) -> Self {
        self.retraction = retraction;
        self
    }

    pub fn retraction(&self) -> StiefelRetraction {
        self.retraction
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_components(&self) -> usize {
        self.factors.len()
    }

    /// True if every factor is Euclidean, i.e. the manifold is a vector space.
    pub fn is_linear(&self) -> bool {
        self.factors.iter().all(Factor::is_euclidean)
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.factors.iter().map(Factor::shape).collect()
    }

    pub fn zeros(&self) -> Ambient {
        Ambient::new(
            self.shapes()
                .into_iter()
                .map(|(r, c)| DMatrix::zeros(r, c))
                .collect(),
        )
    }

    fn check_ambient(&self, v: &Ambient) -> Result<()> {
        if v.shapes() == self.shapes() {
            Ok(())
        } else {
            dimension(format!(
                "expected ambient shapes {:?}, got {:?}",
                self.shapes(),
                v.shapes()
            ))
        }
    }

    fn residual_of(&self, coords: &Ambient) -> f64 {
        self.factors
            .iter()
            .zip(coords.parts())
            .map(|(f, x)| f.residual(x))
            .fold(0.0, f64::max)
    }
}

/// A point on a manifold, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    coords: Ambient,
}

impl ManifoldPoint {
    /// Validates shape and membership (to [`CONSTRUCTION_TOL`]).
    pub fn new(manifold: Manifold, coords: Ambient) -> Result<Self> {
        manifold.check_ambient(&coords)?;
        let res = manifold.residual_of(&coords);
        if !(res <= CONSTRUCTION_TOL) {
            return invalid(format!("point is off the manifold (residual {res:e})"));
        }
        Ok(ManifoldPoint { manifold, coords })
    }

    /// Skips the membership test; shapes are still checked.
    pub fn new_unchecked(manifold: Manifold, coords: Ambient) -> Result<Self> {
        manifold.check_ambient(&coords)?;
        Ok(ManifoldPoint { manifold, coords })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn coords(&self) -> &Ambient {
        &self.coords
    }

    pub fn into_coords(self) -> Ambient {
        self.coords
    }

    pub fn component(&self, i: usize) -> &DMatrix<f64> {
        self.coords.part(i)
    }
}

/// A tangent vector, produced by [`tangent_project`] or by scaling another
/// tangent vector at the same base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: Ambient,
}

impl TangentVector {
    pub fn zero(x: &ManifoldPoint) -> Self {
        TangentVector {
            coords: Ambient::zeros_like(x.coords()),
        }
    }

    /// Wraps ambient coordinates that the caller knows to be tangent.
    pub fn from_tangent_coords(coords: Ambient) -> Self {
        TangentVector { coords }
    }

    pub fn coords(&self) -> &Ambient {
        &self.coords
    }

    pub fn into_coords(self) -> Ambient {
        self.coords
    }

    pub fn scale(&self, alpha: f64) -> TangentVector {
        TangentVector {
            coords: self.coords.scale(alpha),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.coords.dot(&other.coords)
    }
}

/// Orthogonal projection of an ambient array onto `T_x M`.
pub fn tangent_project(x: &ManifoldPoint, v: &Ambient) -> Result<TangentVector> {
    x.manifold.check_ambient(v)?;
    let parts = x
        .manifold
        .factors
        .iter()
        .zip(x.coords.parts().iter().zip(v.parts()))
        .map(|(f, (xp, vp))| f.project(xp, vp))
        .collect();
    Ok(TangentVector {
        coords: Ambient::new(parts),
    })
}

/// Retraction `R_x(ξ)`, applied factor by factor.
pub fn retract(x: &ManifoldPoint, xi: &TangentVector) -> Result<ManifoldPoint> {
    x.manifold.check_ambient(&xi.coords)?;
    let kind = x.manifold.retraction;
    let parts = x
        .manifold
        .factors
        .iter()
        .zip(x.coords.parts().iter().zip(xi.coords.parts()))
        .map(|(f, (xp, vp))| f.retract(xp, vp, kind))
        .collect();
    Ok(ManifoldPoint {
        manifold: x.manifold.clone(),
        coords: Ambient::new(parts),
    })
}

/// Riemannian metric: the ambient inner product.
pub fn inner(_x: &ManifoldPoint, a: &TangentVector, b: &TangentVector) -> f64 {
    a.dot(b)
}

/// Membership test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipCheck {
    pub on_manifold: bool,
    /// `|‖x‖ − 1|` on spheres, `‖XᵀX − I‖_F` on Stiefel factors, maximized over factors.
    pub residual: f64,
}

pub fn manifold_check(x: &ManifoldPoint) -> MembershipCheck {
    let residual = x.manifold.residual_of(&x.coords);
    MembershipCheck {
        on_manifold: residual <= MEMBERSHIP_TOL,
        residual,
    }
}

/// Largest violation of the tangent-space defining equations over factors.
pub fn tangent_residual(x: &ManifoldPoint, v: &TangentVector) -> f64 {
    x.manifold
        .factors
        .iter()
        .zip(x.coords.parts().iter().zip(v.coords.parts()))
        .map(|(f, (xp, vp))| f.tangent_residual(xp, vp))
        .fold(0.0, f64::max)
}

/// Random point: Gaussian on Euclidean factors, normalized Gaussian on
/// spheres, Q factor of a Gaussian matrix on Stiefel factors.
pub fn random_point<R: Rng + ?Sized>(manifold: &Manifold, rng: &mut R) -> ManifoldPoint {
    let parts = manifold.factors.iter().map(|f| f.random(rng)).collect();
    ManifoldPoint {
        manifold: manifold.clone(),
        coords: Ambient::new(parts),
    }
}

/// Gaussian ambient array with the manifold's shapes.
pub fn random_ambient<R: Rng + ?Sized>(manifold: &Manifold, rng: &mut R) -> Ambient {
    Ambient::new(
        manifold
            .shapes()
            .into_iter()
            .map(|(r, c)| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect(),
    )
}

/// Random unit-norm tangent vector at `x`.
pub fn random_tangent<R: Rng + ?Sized>(x: &ManifoldPoint, rng: &mut R) -> TangentVector {
    loop {
        let v = random_ambient(&x.manifold, rng);
        let t = tangent_project(x, &v).expect("shapes agree by construction");
        let n = t.norm();
        if n > 1e-8 {
            return t.scale(1.0 / n);
        }
    }
}
