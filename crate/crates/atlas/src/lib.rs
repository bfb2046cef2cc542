//! Configuration files, JSON reports, OBJ/SVG output and the command
//! implementations behind the `varifold-atlas` binary.
//!
//! The algorithms live in [`atlas_core`], re-exported here as [`core_algorithms`].

pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod report;

pub use atlas_core as core_algorithms;
pub use config::Config;
pub use error::{AtlasError, Result};
pub use report::RunReport;
