//! Small dense helpers for the p×p factors that appear in Stiefel geometry.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// `G^{-1/2}` for a symmetric positive definite `G` via eigendecomposition.
pub fn inv_sqrt_spd(g: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (g + g.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt());
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose()
}

/// Orthonormal polar factor `A (AᵀA)^{-1/2}` of a full column rank matrix.
pub fn polar_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let gram = a.transpose() * a;
    a * inv_sqrt_spd(&gram)
}

/// Thin QR factor Q with the sign convention diag(R) > 0, which makes the
/// factorization unique.
pub fn qr_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Symmetric part `(A + Aᵀ)/2`.
pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}
