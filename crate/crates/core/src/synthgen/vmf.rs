use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::normal;
use crate::error::{invalid, Result};
use crate::geometry::{random_point, Manifold};
use crate::objectives::LabeledDataset;

/// One draw from the von Mises-Fisher distribution with unit mean `mu` and
/// concentration `kappa`, by Wood's rejection sampler for the component
/// along `mu`.
pub fn sample_vmf<R: Rng + ?Sized>(mu: &DMatrix<f64>, kappa: f64, rng: &mut R) -> DMatrix<f64> {
    let m = mu.nrows();
    let dm = (m - 1) as f64;
    let b = dm / (2.0 * kappa + (4.0 * kappa * kappa + dm * dm).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + dm * (1.0 - x0 * x0).ln();
    let beta = Beta::new(dm / 2.0, dm / 2.0).expect("positive shape parameters");
    let w = loop {
        let z: f64 = beta.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + dm * (1.0 - x0 * w).ln() - c >= u.ln() {
            break w;
        }
    };
    // uniform direction orthogonal to mu
    let v = loop {
        let g = DMatrix::from_fn(m, 1, |_, _| normal(rng));
        let v = &g - mu * mu.dot(&g);
        let n = v.norm();
        if n > 1e-12 {
            break v / n;
        }
    };
    let x = mu * w + v * (1.0 - w * w).max(0.0).sqrt();
    let n = x.norm();
    x / n
}

/// `l` clusters of `n_per` vMF samples around uniformly drawn mean directions.
pub fn gen_vmf_clusters<R: Rng + ?Sized>(
    l: usize,
    n_per: usize,
    ambient_dim: usize,
    kappa: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if !(kappa > 0.0) || ambient_dim < 2 {
        return invalid("need kappa > 0 and ambient_dim >= 2");
    }
    let sphere = Manifold::sphere(ambient_dim)?;
    let mut points = Vec::with_capacity(l * n_per);
    let mut labels = Vec::with_capacity(l * n_per);
    for t in 0..l {
        let mu = random_point(&sphere, rng).into_coords().into_parts().remove(0);
        for _ in 0..n_per {
            points.push(sample_vmf(&mu, kappa, rng));
            labels.push(t);
        }
    }
    LabeledDataset::new("vmf_clusters", sphere, points, Some(labels))
}
