use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::geometry::{manifold_check, Ambient, Factor, Manifold, ManifoldPoint, MEMBERSHIP_TOL};

/// Data points on a single-factor manifold, with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    manifold: Manifold,
    points: Vec<DMatrix<f64>>,
    labels: Option<Vec<usize>>,
    /// Column `j` holds point `j` flattened column-major.
    flat: DMatrix<f64>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        manifold: Manifold,
        points: Vec<DMatrix<f64>>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if manifold.num_components() != 1 {
            return invalid("dataset points must live on a single-factor manifold");
        }
        if points.is_empty() {
            return invalid("dataset is empty");
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return invalid(format!(
                    "{} labels for {} points",
                    l.len(),
                    points.len()
                ));
            }
        }
        let shape = manifold.shapes()[0];
        for (j, p) in points.iter().enumerate() {
            let x = ManifoldPoint::new_unchecked(manifold.clone(), Ambient::new(vec![p.clone()]))?;
            let check = manifold_check(&x);
            if !check.on_manifold {
                return invalid(format!(
                    "point {j} is off the manifold (residual {:e} > {MEMBERSHIP_TOL:e})",
                    check.residual
                ));
            }
        }
        let rows = shape.0 * shape.1;
        let mut flat = DMatrix::zeros(rows, points.len());
        for (j, p) in points.iter().enumerate() {
            flat.column_mut(j).copy_from_slice(p.as_slice());
        }
        Ok(LabeledDataset {
            name: name.into(),
            manifold,
            points,
            labels,
            flat,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn factor(&self) -> Factor {
        self.manifold.factors()[0]
    }

    pub fn points(&self) -> &[DMatrix<f64>] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &DMatrix<f64> {
        &self.points[j]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// All points as columns of one matrix, each flattened column-major.
    pub fn flat(&self) -> &DMatrix<f64> {
        &self.flat
    }

    /// The point `j` as a manifold point.
    pub fn as_point(&self, j: usize) -> ManifoldPoint {
        ManifoldPoint::new_unchecked(self.manifold.clone(), Ambient::new(vec![self.points[j].clone()]))
            .expect("shape checked at construction")
    }

    /// Centroid configuration made of the given data points.
    pub fn centers_from_indices(&self, indices: &[usize]) -> Result<ManifoldPoint> {
        if indices.is_empty() {
            return invalid("need at least one center");
        }
        let m = self.manifold.power(indices.len())?;
        let parts = indices.iter().map(|&j| self.points[j].clone()).collect();
        ManifoldPoint::new_unchecked(m, Ambient::new(parts))
    }

    /// Same dataset with points reordered by `perm` (`new[i] = old[perm[i]]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let points = perm.iter().map(|&i| self.points[i].clone()).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&i| l[i]).collect());
        LabeledDataset::new(self.name.clone(), self.manifold.clone(), points, labels)
    }
}
