use nalgebra::DMatrix;

/// A tuple of dense matrices living in the ambient Euclidean space of a
/// (product) manifold. Vectors are stored as single-column matrices.
///
/// The inner product is the sum of the componentwise Frobenius products.
#[derive(Debug, Clone, PartialEq)]
pub struct Ambient {
    parts: Vec<DMatrix<f64>>,
}

impl Ambient {
    pub fn new(parts: Vec<DMatrix<f64>>) -> Self {
        Ambient { parts }
    }

    /// Wraps a single column vector.
    pub fn from_vec(v: Vec<f64>) -> Self {
        let n = v.len();
        Ambient::new(vec![DMatrix::from_vec(n, 1, v)])
    }

    pub fn zeros_like(other: &Ambient) -> Self {
        Ambient::new(
            other
                .parts
                .iter()
                .map(|m| DMatrix::zeros(m.nrows(), m.ncols()))
                .collect(),
        )
    }

    pub fn parts(&self) -> &[DMatrix<f64>] {
        &self.parts
    }

    pub fn parts_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.parts
    }

    pub fn into_parts(self) -> Vec<DMatrix<f64>> {
        self.parts
    }

    pub fn part(&self, i: usize) -> &DMatrix<f64> {
        &self.parts[i]
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn same_shape(&self, other: &Ambient) -> bool {
        self.parts.len() == other.parts.len()
            && self
                .parts
                .iter()
                .zip(&other.parts)
                .all(|(a, b)| a.shape() == b.shape())
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.parts.iter().map(|m| m.shape()).collect()
    }

    pub fn dot(&self, other: &Ambient) -> f64 {
        debug_assert!(self.same_shape(other));
        self.parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| a.dot(b))
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.parts.iter().map(|m| m.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, alpha: f64) -> Ambient {
        Ambient::new(self.parts.iter().map(|m| m * alpha).collect())
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        for m in &mut self.parts {
            *m *= alpha;
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Ambient) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.zip_apply(b, |s, o| *s += alpha * o);
        }
    }

    pub fn add(&self, other: &Ambient) -> Ambient {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Ambient) -> Ambient {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.parts.iter().all(|m| m.iter().all(|v| v.is_finite()))
    }
}
