//! Comparison methods: DCA and its boosted variant for problems with a DC
//! splitting, and spherical k-means for data on the sphere.

mod dca;
mod kmeans;

pub use dca::{bdca_solve, dca_solve, dca_step, BdcaParams, DcaConfig, InnerSolver};
pub use kmeans::{spherical_kmeans, KMeansResult};
