//! Heat conduction in layered media: discrete spectra of strips with
//! piecewise-constant conductivity, oscillating integral transforms, moving
//! interface problems reduced to Volterra systems, and a two-phase Stefan
//! solver built on the same machinery.

pub mod error;
pub mod mixed;
pub mod multilayer;
pub mod obm;
pub mod oit;
pub mod quad;
pub mod roots;
pub mod smallmat;
pub mod spectrum;
pub mod stefan;
pub mod volterra;

pub use error::{Error, Result};

/// Crate version, logged by drivers alongside [`MODULES`].
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Solver modules shipped in this version.
pub const MODULES: &[&str] = &["smallmat", "spectrum", "oit", "mixed", "volterra", "obm", "multilayer", "stefan"];
