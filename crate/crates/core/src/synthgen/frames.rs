use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Manifold;
use crate::objectives::LabeledDataset;

/// Manifold the generated frames are read on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameTarget {
    #[default]
    Stiefel,
    Grassmann,
}

/// `m ← m · G`, where `G` rotates by `theta` in the plane of coordinates
/// `j` and `j + 1` (0-based), with `G[j][j+1] = −sin θ`.
pub fn givens_right_multiply(m: &mut DMatrix<f64>, j: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    for i in 0..m.nrows() {
        let a = m[(i, j)];
        let b = m[(i, j + 1)];
        m[(i, j)] = a * c + b * s;
        m[(i, j + 1)] = -a * s + b * c;
    }
}

/// First `p` columns of `∏_{k=1}^{n−1} ∏_{j=k}^{n−1} G_j(θ_{k,j})`.
///
/// `angles` lists `θ_{k,j}` in the order of the product, `n(n−1)/2` values.
pub fn frame_from_angles(n: usize, p: usize, angles: &[f64]) -> DMatrix<f64> {
    assert_eq!(angles.len(), n * (n - 1) / 2, "wrong number of angles");
    let mut o = DMatrix::identity(n, n);
    let mut it = angles.iter();
    for k in 1..n {
        for j in k..n {
            givens_right_multiply(&mut o, j - 1, *it.next().unwrap());
        }
    }
    o.columns(0, p).into_owned()
}

/// `l` clusters of `n × p` frames.
///
/// Each cluster draws base angles uniformly from `[0, 2π)`; each point adds
/// independent `Uniform[−noise_halfwidth, noise_halfwidth]` noise to every
/// angle.
pub fn gen_frame_clusters<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    l: usize,
    n_per: usize,
    noise_halfwidth: f64,
    target: FrameTarget,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if p == 0 || n < p || !(noise_halfwidth >= 0.0) {
        return invalid("need 1 <= p <= n and nonnegative noise");
    }
    let count = n * (n - 1) / 2;
    let mut points = Vec::with_capacity(l * n_per);
    let mut labels = Vec::with_capacity(l * n_per);
    for t in 0..l {
        let base: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        for _ in 0..n_per {
            let angles: Vec<f64> = base
                .iter()
                .map(|a| {
                    if noise_halfwidth > 0.0 {
                        a + rng.random_range(-noise_halfwidth..=noise_halfwidth)
                    } else {
                        *a
                    }
                })
                .collect();
            points.push(frame_from_angles(n, p, &angles));
            labels.push(t);
        }
    }
    let (manifold, name) = match target {
        FrameTarget::Stiefel => (Manifold::stiefel(n, p)?, "stiefel_clusters"),
        FrameTarget::Grassmann => (Manifold::grassmann(n, p)?, "grassmann_clusters"),
    };
    LabeledDataset::new(name, manifold, points, Some(labels))
}
