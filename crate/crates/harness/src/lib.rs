//! Command-line driver for layerheat: JSON run configuration, CSV and
//! plot-script output, the finite-difference oracle used for cross-checks,
//! and the acceptance checks behind `validate`.

pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod fd;
pub mod output;
pub mod runners;

pub use error::{HarnessError, HarnessResult};
