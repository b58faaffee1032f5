//! Config-driven experiments over `blowup-core`.
//!
//! A config (TOML) lists experiments; [`run_config`] runs them and writes a
//! bundle: `summary.json`, `table.txt`, the config itself and one directory of
//! CSV/JSON tables per experiment.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use error::{LabError, LabResult};
pub use presets::preset;
pub use report::{Assertion, ExperimentResult, Summary};
pub use run::{run_config, run_experiment};
