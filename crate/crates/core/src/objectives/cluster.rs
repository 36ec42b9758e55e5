//! Centroid clustering objectives
//!
//! `φ(X) = (1/n) Σⱼ minₜ d(xₜ, yⱼ)` over centers `x₁ … x_l` on `Mˡ`. The
//! Euclidean case with `d = ‖x − y‖²` is minimum sum-of-squares clustering.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{argmin_lowest, DcComponents, DcObjective, LabeledDataset, Objective, ObjectiveEvaluation};
use crate::error::{invalid, Result};
use crate::geometry::{Ambient, Factor, Manifold, ManifoldPoint};

/// Dissimilarity between a center and a data point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissimilarityKind {
    /// `‖x − y‖²` on Euclidean data.
    SquaredEuclidean,
    /// `1 − ⟨x, y⟩` on the sphere.
    Cosine,
    /// `p − tr(XᵀY)` on the Stiefel manifold.
    StiefelTrace,
    /// `p − tr(UUᵀVVᵀ)` on Grassmann representatives.
    GrassmannProjector,
}

impl DissimilarityKind {
    pub fn is_compatible(&self, factor: &Factor) -> bool {
        matches!(
            (self, factor),
            (DissimilarityKind::SquaredEuclidean, Factor::Euclidean { .. })
                | (DissimilarityKind::Cosine, Factor::Sphere { .. })
                | (DissimilarityKind::StiefelTrace, Factor::Stiefel { .. })
                | (DissimilarityKind::GrassmannProjector, Factor::GrassmannStiefel { .. })
        )
    }

    /// The natural dissimilarity for data on `factor`.
    pub fn default_for(factor: &Factor) -> Self {
        match factor {
            Factor::Euclidean { .. } => DissimilarityKind::SquaredEuclidean,
            Factor::Sphere { .. } => DissimilarityKind::Cosine,
            Factor::Stiefel { .. } => DissimilarityKind::StiefelTrace,
            Factor::GrassmannStiefel { .. } => DissimilarityKind::GrassmannProjector,
        }
    }
}

/// Dissimilarity of a single pair.
pub fn dissimilarity(kind: DissimilarityKind, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    match kind {
        DissimilarityKind::SquaredEuclidean => (x - y).norm_squared(),
        DissimilarityKind::Cosine => 1.0 - x.dot(y),
        DissimilarityKind::StiefelTrace => x.ncols() as f64 - x.dot(y),
        DissimilarityKind::GrassmannProjector => x.ncols() as f64 - (x.transpose() * y).norm_squared(),
    }
}

fn check_centers(centers: &ManifoldPoint, data: &LabeledDataset) -> Result<()> {
    let factor = data.factor();
    if centers.manifold().factors().iter().any(|f| f.shape() != factor.shape()) {
        return invalid(format!(
            "center shapes {:?} do not match data shape {:?}",
            centers.manifold().shapes(),
            factor.shape()
        ));
    }
    Ok(())
}

/// `n × l` matrix of dissimilarities between data points and centers.
fn dissimilarities(kind: DissimilarityKind, centers: &Ambient, data: &LabeledDataset) -> DMatrix<f64> {
    let n = data.len();
    let l = centers.len();
    match kind {
        DissimilarityKind::Cosine | DissimilarityKind::StiefelTrace => {
            let offset = match kind {
                DissimilarityKind::Cosine => 1.0,
                _ => centers.part(0).ncols() as f64,
            };
            let rows = data.flat().nrows();
            let mut c = DMatrix::zeros(rows, l);
            for (t, x) in centers.parts().iter().enumerate() {
                c.column_mut(t).copy_from_slice(x.as_slice());
            }
            let mut d = data.flat().tr_mul(&c);
            d.apply(|v| *v = offset - *v);
            d
        }
        DissimilarityKind::SquaredEuclidean => DMatrix::from_fn(n, l, |j, t| {
            data.flat()
                .column(j)
                .iter()
                .zip(centers.part(t).iter())
                .map(|(y, x)| (x - y) * (x - y))
                .sum()
        }),
        DissimilarityKind::GrassmannProjector => {
            DMatrix::from_fn(n, l, |j, t| dissimilarity(kind, centers.part(t), data.point(j)))
        }
    }
}

/// Closest center of every data point (lowest index on ties) and the
/// corresponding dissimilarities.
pub fn assign(centers: &ManifoldPoint, data: &LabeledDataset, kind: DissimilarityKind) -> Result<(Vec<usize>, Vec<f64>)> {
    check_centers(centers, data)?;
    let d = dissimilarities(kind, centers.coords(), data);
    Ok(assign_rows(&d))
}

fn assign_rows(d: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>) {
    (0..d.nrows())
        .map(|j| argmin_lowest(d.row(j).iter().copied()))
        .unzip()
}

/// Value and ambient subgradient of `(1/n) Σⱼ minₜ d(xₜ, yⱼ)`.
///
/// The subgradient sums, for every data point, the gradient of its active
/// term with respect to its assigned center: `2(x − y)`, `−y`, `−Y` or
/// `−2VVᵀU` depending on the dissimilarity.
pub fn manifold_cluster_eval(
    centers: &ManifoldPoint,
    data: &LabeledDataset,
    kind: DissimilarityKind,
) -> Result<ObjectiveEvaluation> {
    if !kind.is_compatible(&data.factor()) {
        return invalid(format!("{kind:?} is not defined on {:?}", data.factor()));
    }
    check_centers(centers, data)?;
    let n = data.len();
    let inv_n = 1.0 / n as f64;
    let d = dissimilarities(kind, centers.coords(), data);
    let (assignment, mins) = assign_rows(&d);
    let value = mins.iter().sum::<f64>() * inv_n;

    let mut sub = Ambient::zeros_like(centers.coords());
    {
        let parts = sub.parts_mut();
        match kind {
            DissimilarityKind::SquaredEuclidean => {
                let mut counts = vec![0usize; parts.len()];
                for (j, &t) in assignment.iter().enumerate() {
                    counts[t] += 1;
                    parts[t] -= data.point(j);
                }
                for (t, part) in parts.iter_mut().enumerate() {
                    *part += centers.component(t) * counts[t] as f64;
                    *part *= 2.0 * inv_n;
                }
            }
            DissimilarityKind::Cosine | DissimilarityKind::StiefelTrace => {
                for (j, &t) in assignment.iter().enumerate() {
                    parts[t] -= data.point(j);
                }
                for part in parts.iter_mut() {
                    *part *= inv_n;
                }
            }
            DissimilarityKind::GrassmannProjector => {
                for (j, &t) in assignment.iter().enumerate() {
                    let v = data.point(j);
                    let vtu = v.tr_mul(centers.component(t));
                    parts[t] -= v * vtu;
                }
                for part in parts.iter_mut() {
                    *part *= 2.0 * inv_n;
                }
            }
        }
    }
    Ok(ObjectiveEvaluation { value, subgradient: sub })
}

/// Minimum sum-of-squares clustering value and subgradient.
pub fn mssc_eval(centers: &ManifoldPoint, data: &LabeledDataset) -> Result<ObjectiveEvaluation> {
    manifold_cluster_eval(centers, data, DissimilarityKind::SquaredEuclidean)
}

/// DC pieces of the MSSC objective:
/// `g = (1/n) Σᵢ Σⱼ ‖xⱼ − yᵢ‖² + (ρ/2)‖X‖²` and
/// `h = (1/n) Σᵢ maxⱼ Σ_{t≠j} ‖xₜ − yᵢ‖² + (ρ/2)‖X‖²`, so that `φ = g − h`.
pub fn mssc_dc_components(centers: &Ambient, data: &LabeledDataset, rho: f64) -> Result<DcComponents> {
    if !(rho >= 0.0) {
        return invalid(format!("rho must be nonnegative, got {rho}"));
    }
    if !matches!(data.factor(), Factor::Euclidean { .. }) {
        return invalid("MSSC requires Euclidean data");
    }
    let l = centers.len();
    let n = data.len();
    let inv_n = 1.0 / n as f64;
    let d = dissimilarities(DissimilarityKind::SquaredEuclidean, centers, data);
    let (assignment, _) = assign_rows(&d);
    let reg = 0.5 * rho * centers.norm_squared();

    let mut g_value = 0.0;
    let mut h_value = 0.0;
    let mut g_grad = centers.scale(rho);
    let mut h_sub = centers.scale(rho);
    let mut sum_y = DMatrix::<f64>::zeros(data.point(0).nrows(), 1);
    for j in 0..n {
        sum_y += data.point(j);
        // argmax_t Σ_{s≠t} d_js is the closest center
        let star = assignment[j];
        for t in 0..l {
            g_value += d[(j, t)];
            if t != star {
                h_value += d[(j, t)];
                h_sub.parts_mut()[t] += (centers.part(t) - data.point(j)) * (2.0 * inv_n);
            }
        }
    }
    for (t, part) in g_grad.parts_mut().iter_mut().enumerate() {
        *part += (centers.part(t) * n as f64 - &sum_y) * (2.0 * inv_n);
    }
    Ok(DcComponents {
        g_value: g_value * inv_n + reg,
        g_gradient: g_grad,
        h_value: h_value * inv_n + reg,
        h_subgradient: h_sub,
        scale: 1.0,
        constant: 0.0,
    })
}

/// Clustering objective over `l` centers for a fixed dataset.
#[derive(Debug, Clone)]
pub struct ClusterObjective {
    data: LabeledDataset,
    kind: DissimilarityKind,
    manifold: Manifold,
}

impl ClusterObjective {
    pub fn new(data: LabeledDataset, clusters: usize, kind: DissimilarityKind) -> Result<Self> {
        if clusters == 0 {
            return invalid("need at least one cluster");
        }
        if !kind.is_compatible(&data.factor()) {
            return invalid(format!("{kind:?} is not defined on {:?}", data.factor()));
        }
        let manifold = data.manifold().power(clusters)?;
        Ok(ClusterObjective { data, kind, manifold })
    }

    pub fn data(&self) -> &LabeledDataset {
        &self.data
    }

    pub fn kind(&self) -> DissimilarityKind {
        self.kind
    }

    pub fn clusters(&self) -> usize {
        self.manifold.num_components()
    }

    pub fn assign(&self, centers: &ManifoldPoint) -> Result<Vec<usize>> {
        Ok(assign(centers, &self.data, self.kind)?.0)
    }
}

impl Objective for ClusterObjective {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn value(&self, x: &ManifoldPoint) -> Result<f64> {
        check_centers(x, &self.data)?;
        let d = dissimilarities(self.kind, x.coords(), &self.data);
        let (_, mins) = assign_rows(&d);
        Ok(mins.iter().sum::<f64>() / self.data.len() as f64)
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation> {
        manifold_cluster_eval(x, &self.data, self.kind)
    }
}

/// Minimum sum-of-squares clustering, with its DC splitting.
#[derive(Debug, Clone)]
pub struct Mssc(ClusterObjective);

impl Mssc {
    pub fn new(data: LabeledDataset, clusters: usize) -> Result<Self> {
        Ok(Mssc(ClusterObjective::new(data, clusters, DissimilarityKind::SquaredEuclidean)?))
    }

    pub fn inner(&self) -> &ClusterObjective {
        &self.0
    }
}

impl Objective for Mssc {
    fn manifold(&self) -> &Manifold {
        self.0.manifold()
    }

    fn value(&self, x: &ManifoldPoint) -> Result<f64> {
        self.0.value(x)
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation> {
        self.0.evaluate(x)
    }
}

impl DcObjective for Mssc {
    fn dc_components(&self, x: &Ambient, rho: f64) -> Result<DcComponents> {
        mssc_dc_components(x, &self.0.data, rho)
    }

    /// `∇g(x) = y` is separable: `(2 + ρ) xₜ − 2ȳ = yₜ`.
    fn dc_subproblem_argmin(&self, y: &Ambient, rho: f64) -> Result<Ambient> {
        if !(rho >= 0.0) {
            return invalid(format!("rho must be nonnegative, got {rho}"));
        }
        let data = &self.0.data;
        let mut mean = DMatrix::<f64>::zeros(data.point(0).nrows(), 1);
        for p in data.points() {
            mean += p;
        }
        mean /= data.len() as f64;
        Ok(Ambient::new(
            y.parts()
                .iter()
                .map(|yt| (yt + &mean * 2.0) / (2.0 + rho))
                .collect(),
        ))
    }
}
