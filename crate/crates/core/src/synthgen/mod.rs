//! Seeded generators for synthetic benchmark data.
//!
//! Every generator takes an explicit rng; [`GenSpec::generate`] seeds a
//! `ChaCha8Rng` from the spec so that a spec file fully determines its data.

mod frames;
mod vmf;

pub use frames::{frame_from_angles, gen_frame_clusters, givens_right_multiply, FrameTarget};
pub use vmf::{gen_vmf_clusters, sample_vmf};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Manifold;
use crate::objectives::LabeledDataset;

/// Dataset family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// Gaussian blobs around Gaussian centers in `ℝ^dim`.
    GaussianClusters {
        l: usize,
        n_per: usize,
        dim: usize,
        #[serde(default = "default_center_std")]
        center_std: f64,
        #[serde(default = "default_point_std")]
        point_std: f64,
    },
    /// von Mises-Fisher clusters on the unit sphere of `ℝ^ambient_dim`.
    VmfClusters {
        l: usize,
        n_per: usize,
        ambient_dim: usize,
        kappa: f64,
    },
    /// Perturbed products of plane rotations, truncated to `p` columns.
    FrameClusters {
        n: usize,
        p: usize,
        l: usize,
        n_per: usize,
        #[serde(default = "default_noise")]
        noise_halfwidth: f64,
        #[serde(default)]
        target: FrameTarget,
    },
    /// Distances between standard normal points in `ℝ^source_dim`.
    MdsRandom {
        n: usize,
        source_dim: usize,
        embed_dim: usize,
    },
}

fn default_center_std() -> f64 {
    10.0
}

fn default_point_std() -> f64 {
    1.0
}

fn default_noise() -> f64 {
    PI / 9.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

/// A multidimensional scaling instance with the points that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct MdsInstance {
    pub delta: DMatrix<f64>,
    /// Source points as columns.
    pub source: DMatrix<f64>,
    pub embed_dim: usize,
}

#[derive(Debug, Clone)]
pub enum Generated {
    Clusters(LabeledDataset),
    Mds(MdsInstance),
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                invalid(format!("{name} must be positive"))
            } else {
                Ok(())
            }
        };
        match &self.family {
            Family::GaussianClusters { l, n_per, dim, center_std, point_std } => {
                positive("l", *l)?;
                positive("n_per", *n_per)?;
                positive("dim", *dim)?;
                if !(*center_std >= 0.0 && *point_std >= 0.0) {
                    return invalid("standard deviations must be nonnegative");
                }
            }
            Family::VmfClusters { l, n_per, ambient_dim, kappa } => {
                positive("l", *l)?;
                positive("n_per", *n_per)?;
                if *ambient_dim < 2 {
                    return invalid("ambient_dim must be at least 2");
                }
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return invalid(format!("kappa must be positive, got {kappa}"));
                }
            }
            Family::FrameClusters { n, p, l, n_per, noise_halfwidth, .. } => {
                positive("p", *p)?;
                positive("l", *l)?;
                positive("n_per", *n_per)?;
                if n < p {
                    return invalid(format!("need n >= p, got n = {n}, p = {p}"));
                }
                if !(*noise_halfwidth >= 0.0) {
                    return invalid("noise_halfwidth must be nonnegative");
                }
            }
            Family::MdsRandom { n, source_dim, embed_dim } => {
                if *n < 2 {
                    return invalid("MDS needs at least two points");
                }
                positive("embed_dim", *embed_dim)?;
                if source_dim < embed_dim {
                    return invalid("source_dim must be at least embed_dim");
                }
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Generated> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(match &self.family {
            &Family::GaussianClusters { l, n_per, dim, center_std, point_std } => {
                Generated::Clusters(gen_gaussian_clusters(l, n_per, dim, center_std, point_std, &mut rng)?)
            }
            &Family::VmfClusters { l, n_per, ambient_dim, kappa } => {
                Generated::Clusters(gen_vmf_clusters(l, n_per, ambient_dim, kappa, &mut rng)?)
            }
            &Family::FrameClusters { n, p, l, n_per, noise_halfwidth, target } => {
                Generated::Clusters(gen_frame_clusters(n, p, l, n_per, noise_halfwidth, target, &mut rng)?)
            }
            &Family::MdsRandom { n, source_dim, embed_dim } => {
                Generated::Mds(gen_mds_instance(n, source_dim, embed_dim, &mut rng)?)
            }
        })
    }
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// `l` centers drawn from `N(0, center_std² I)`, `n_per` points from
/// `N(center, point_std² I)` each; labels are the generating cluster.
pub fn gen_gaussian_clusters<R: Rng + ?Sized>(
    l: usize,
    n_per: usize,
    dim: usize,
    center_std: f64,
    point_std: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    let mut points = Vec::with_capacity(l * n_per);
    let mut labels = Vec::with_capacity(l * n_per);
    for t in 0..l {
        let center = DMatrix::from_fn(dim, 1, |_, _| center_std * normal(rng));
        for _ in 0..n_per {
            points.push(DMatrix::from_fn(dim, 1, |i, _| center[i] + point_std * normal(rng)));
            labels.push(t);
        }
    }
    LabeledDataset::new("gaussian_clusters", Manifold::euclidean(dim)?, points, Some(labels))
}

/// Target distances between `n` standard normal points in `ℝ^source_dim`.
pub fn gen_mds_instance<R: Rng + ?Sized>(n: usize, source_dim: usize, embed_dim: usize, rng: &mut R) -> Result<MdsInstance> {
    if n < 2 || source_dim < embed_dim || embed_dim == 0 {
        return invalid("need n >= 2 and source_dim >= embed_dim >= 1");
    }
    let source = DMatrix::from_fn(source_dim, n, |_, _| normal(rng));
    let mut delta = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (source.column(i) - source.column(j)).norm();
            delta[(i, j)] = d;
            delta[(j, i)] = d;
        }
    }
    Ok(MdsInstance { delta, source, embed_dim })
}
