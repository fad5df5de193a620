//! File formats, experiment configs and orchestration for the `latticetherm`
//! command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod locate;
pub mod manifest;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Kind};
pub use error::{Diagnostic, LabError, Result};
pub use formats::{interaction_from_json, interaction_to_json};
pub use manifest::RunManifest;
pub use run::{report, run, validate, RunOptions};
