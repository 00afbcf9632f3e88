//! Command-line front end for the quantum-noise models: config loading,
//! CSV tables and SVG plots.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod table;

pub use config::{load_config, Mode, RunConfig};
pub use error::CliError;
pub use run::{render, run, Artifacts};
