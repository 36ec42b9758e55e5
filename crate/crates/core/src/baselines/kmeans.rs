use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::geometry::{Ambient, Factor, ManifoldPoint};
use crate::objectives::{assign, DissimilarityKind, LabeledDataset};
use crate::solver::relative_change_phi;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub centers: ManifoldPoint,
    pub labels: Vec<usize>,
    /// Cosine clustering objective after every center update.
    pub objective: Vec<f64>,
    pub iterations: usize,
    /// Assignments stopped changing (or the objective stalled below `epsilon`).
    pub converged: bool,
}

/// Spherical k-means from the initial centers `x0`.
///
/// Alternates nearest-center assignment (largest inner product, lowest index
/// on ties) with normalized cluster sums. A cluster that is empty, or whose
/// members sum to zero, is reseeded at the data point currently farthest from
/// its center. Stops when the assignment repeats, the relative objective
/// change is at most `epsilon`, or after `max_iter` updates.
pub fn spherical_kmeans(data: &LabeledDataset, x0: &ManifoldPoint, max_iter: usize, epsilon: f64) -> Result<KMeansResult> {
    if !matches!(data.factor(), Factor::Sphere { .. }) {
        return invalid("spherical k-means needs data on a sphere");
    }
    if x0.manifold() != &data.manifold().power(x0.coords().len())? {
        return invalid("initial centers do not match the data sphere");
    }
    let kind = DissimilarityKind::Cosine;
    let l = x0.coords().len();
    let mut centers = x0.clone();
    let (mut labels, mut dists) = assign(&centers, data, kind)?;
    let mut objective = Vec::new();
    let mut prev_obj = mean(&dists);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let dim = data.point(0).nrows();
        let mut sums = vec![DMatrix::<f64>::zeros(dim, 1); l];
        for (j, &t) in labels.iter().enumerate() {
            sums[t] += data.point(j);
        }
        let mut reseeded = Vec::new();
        let mut parts = Vec::with_capacity(l);
        for (t, s) in sums.into_iter().enumerate() {
            let norm = s.norm();
            if norm > 0.0 && norm.is_finite() {
                parts.push(s / norm);
            } else {
                let j = farthest(&dists, &reseeded);
                reseeded.push(j);
                labels[j] = t;
                dists[j] = 0.0;
                parts.push(data.point(j).clone());
            }
        }
        centers = ManifoldPoint::new_unchecked(centers.manifold().clone(), Ambient::new(parts))?;
        let (new_labels, new_dists) = assign(&centers, data, kind)?;
        let obj = mean(&new_dists);
        objective.push(obj);
        let unchanged = new_labels == labels;
        labels = new_labels;
        dists = new_dists;
        if unchanged || relative_change_phi(prev_obj, obj) <= epsilon {
            converged = true;
            break;
        }
        prev_obj = obj;
    }

    Ok(KMeansResult {
        centers,
        labels,
        objective,
        iterations,
        converged,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn farthest(dists: &[f64], taken: &[usize]) -> usize {
    let mut best = None;
    for (j, &d) in dists.iter().enumerate() {
        if taken.contains(&j) {
            continue;
        }
        if best.is_none_or(|(_, b)| d > b) {
            best = Some((j, d));
        }
    }
    best.map_or(0, |(j, _)| j)
}
