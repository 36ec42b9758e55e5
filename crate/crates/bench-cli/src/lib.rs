//! Command-line harness for the `riemsub` solvers: dataset generation,
//! experiment runs, performance profiles and numerical self-checks.

pub mod check;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod run;

pub use cli::run;
pub use error::{CliError, CliResult};
