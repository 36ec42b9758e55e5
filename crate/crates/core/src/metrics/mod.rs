//! External clustering scores and performance profiles.

mod partition;
mod profile;

pub use partition::{adjusted_rand_index, homogeneity_completeness_v, Partition, VMeasure};
pub use profile::{performance_profile, Profile, ProfileTable};
