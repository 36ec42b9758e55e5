//! Weighted least-squares multidimensional scaling
//!
//! `φ(X) = Σ_{i<j} w_ij (‖xᵢ − xⱼ‖ − δ_ij)²` over `n` points in `ℝᵈ`.
//!
//! Expanding the square gives the DC form used by DCA and BDCA:
//!
//! ```text
//! g(X) = ½ Σ_{i<j} w_ij d_ij²(X)   + (ρ/2)‖X‖²
//! h(X) =   Σ_{i<j} w_ij δ_ij d_ij(X) + (ρ/2)‖X‖²
//! φ(X) = 2 (g(X) − h(X)) + Σ_{i<j} w_ij δ_ij²
//! ```

use nalgebra::DMatrix;

use super::{DcComponents, DcObjective, Objective, ObjectiveEvaluation};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Ambient, Manifold, ManifoldPoint};

fn validate(delta: &DMatrix<f64>, weights: &DMatrix<f64>) -> Result<()> {
    let n = delta.nrows();
    if delta.ncols() != n || weights.shape() != (n, n) {
        return invalid("dissimilarity and weight matrices must be square and of equal size");
    }
    if n < 2 {
        return invalid("need at least two points");
    }
    let scale = delta.amax().max(1.0);
    for i in 0..n {
        if delta[(i, i)] != 0.0 {
            return invalid("dissimilarity matrix must have a zero diagonal");
        }
        for j in 0..n {
            if !(delta[(i, j)] >= 0.0) || !(weights[(i, j)] >= 0.0) {
                return invalid("dissimilarities and weights must be nonnegative");
            }
            if (delta[(i, j)] - delta[(j, i)]).abs() > 1e-12 * scale {
                return invalid("dissimilarity matrix is not symmetric");
            }
            if weights[(i, j)] != weights[(j, i)] {
                return invalid("weight matrix is not symmetric");
            }
        }
    }
    Ok(())
}

fn check_points(x: &Ambient, n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension(format!("expected {n} points, got {}", x.len())));
    }
    Ok(())
}

fn eval_unchecked(x: &Ambient, delta: &DMatrix<f64>, weights: &DMatrix<f64>) -> ObjectiveEvaluation {
    let n = x.len();
    let mut value = 0.0;
    let mut sub = Ambient::zeros_like(x);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights[(i, j)];
            if w == 0.0 {
                continue;
            }
            let diff = x.part(i) - x.part(j);
            let d = diff.norm();
            let r = d - delta[(i, j)];
            value += w * r * r;
            if d > 0.0 {
                let g = diff * (2.0 * w * r / d);
                sub.parts_mut()[i] += &g;
                sub.parts_mut()[j] -= &g;
            }
        }
    }
    ObjectiveEvaluation { value, subgradient: sub }
}

/// Value and subgradient of the weighted MDS stress. Coincident points
/// contribute the subgradient 0 for their pair.
pub fn mds_eval(x: &Ambient, delta: &DMatrix<f64>, weights: &DMatrix<f64>) -> Result<ObjectiveEvaluation> {
    validate(delta, weights)?;
    check_points(x, delta.nrows())?;
    Ok(eval_unchecked(x, delta, weights))
}

/// DC components of the MDS stress; see the module docs for the scale
/// relation (`scale = 2`, `constant = Σ w δ²`).
pub fn mds_dc_components(x: &Ambient, delta: &DMatrix<f64>, weights: &DMatrix<f64>, rho: f64) -> Result<DcComponents> {
    validate(delta, weights)?;
    check_points(x, delta.nrows())?;
    if !(rho >= 0.0) {
        return invalid(format!("rho must be nonnegative, got {rho}"));
    }
    Ok(dc_unchecked(x, delta, weights, rho))
}

fn dc_unchecked(x: &Ambient, delta: &DMatrix<f64>, weights: &DMatrix<f64>, rho: f64) -> DcComponents {
    let n = x.len();
    let reg = 0.5 * rho * x.norm_squared();
    let mut g_value = 0.0;
    let mut h_value = 0.0;
    let mut constant = 0.0;
    let mut g_grad = x.scale(rho);
    let mut h_sub = x.scale(rho);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights[(i, j)];
            if w == 0.0 {
                continue;
            }
            let wd = w * delta[(i, j)];
            let diff = x.part(i) - x.part(j);
            let d2 = diff.norm_squared();
            let d = d2.sqrt();
            g_value += 0.5 * w * d2;
            h_value += wd * d;
            constant += wd * delta[(i, j)];
            let gg = &diff * w;
            g_grad.parts_mut()[i] += &gg;
            g_grad.parts_mut()[j] -= &gg;
            if d > 0.0 {
                let hh = diff * (wd / d);
                h_sub.parts_mut()[i] += &hh;
                h_sub.parts_mut()[j] -= &hh;
            }
        }
    }
    DcComponents {
        g_value: g_value + reg,
        g_gradient: g_grad,
        h_value: h_value + reg,
        h_subgradient: h_sub,
        scale: 2.0,
        constant,
    }
}

/// MDS problem: embed `n` points in `ℝ^embed_dim`.
#[derive(Debug, Clone)]
pub struct Mds {
    delta: DMatrix<f64>,
    weights: DMatrix<f64>,
    manifold: Manifold,
}

impl Mds {
    /// Unit weights off the diagonal.
    pub fn new(delta: DMatrix<f64>, embed_dim: usize) -> Result<Self> {
        let n = delta.nrows();
        let weights = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        Self::weighted(delta, weights, embed_dim)
    }

    pub fn weighted(delta: DMatrix<f64>, weights: DMatrix<f64>, embed_dim: usize) -> Result<Self> {
        validate(&delta, &weights)?;
        let manifold = Manifold::euclidean(embed_dim)?.power(delta.nrows())?;
        Ok(Mds { delta, weights, manifold })
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn num_points(&self) -> usize {
        self.delta.nrows()
    }
}

impl Objective for Mds {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation> {
        check_points(x.coords(), self.num_points())?;
        Ok(eval_unchecked(x.coords(), &self.delta, &self.weights))
    }
}

impl DcObjective for Mds {
    fn dc_components(&self, x: &Ambient, rho: f64) -> Result<DcComponents> {
        check_points(x, self.num_points())?;
        if !(rho >= 0.0) {
            return invalid(format!("rho must be nonnegative, got {rho}"));
        }
        Ok(dc_unchecked(x, &self.delta, &self.weights, rho))
    }

    /// Solves `(L + ρI) X = Y` row-wise, `L` the weighted graph Laplacian.
    /// `L` annihilates constant vectors, so `ρ = 0` is always singular.
    fn dc_subproblem_argmin(&self, y: &Ambient, rho: f64) -> Result<Ambient> {
        check_points(y, self.num_points())?;
        if !(rho > 0.0) {
            return Err(Error::InnerSolver(format!(
                "MDS subproblem is singular for rho = {rho} (translation invariance)"
            )));
        }
        let n = self.num_points();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let w = self.weights[(i, j)];
                    a[(i, j)] -= w;
                    a[(i, i)] += w;
                }
            }
            a[(i, i)] += rho;
        }
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::InnerSolver("Laplacian system is not positive definite".into()))?;
        let dim = y.part(0).nrows();
        let rhs = DMatrix::from_fn(n, dim, |i, k| y.part(i)[(k, 0)]);
        let sol = chol.solve(&rhs);
        Ok(Ambient::new(
            (0..n)
                .map(|i| DMatrix::from_fn(dim, 1, |k, _| sol[(i, k)]))
                .collect(),
        ))
    }
}
