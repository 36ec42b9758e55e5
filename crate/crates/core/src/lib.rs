pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod objectives;
pub mod solver;
pub mod synthgen;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/manifolds.md")]
pub mod book_manifolds {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/objectives.md")]
pub mod book_objectives {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/solver.md")]
pub mod book_solver {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/baselines.md")]
pub mod book_baselines {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/synthgen.md")]
pub mod book_synthgen {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod book_metrics {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod book_diagnostics {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod book_cli {}
