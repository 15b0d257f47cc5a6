//! Command-line front end for the `stoc` physics crate: configuration
//! parsing, figure presets and table output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_file, Format, Grid, Mode, RunConfig};
pub use error::CliError;
pub use run::{compute, execute, figure_files, Peak, Product, RunOutput};
