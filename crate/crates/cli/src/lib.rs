//! Configuration-driven experiments on a qubit emitting into a coupled-cavity
//! array under a synthetic force: presets, cross-validation and file output.

// NaN must fail every validation, so `!(x > 0.0)` is deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod seedcheck;

pub use config::ExperimentConfig;
pub use error::{RunError, RunResult};
pub use output::RunManifest;
pub use presets::{resolve, Kind, RunPoint, PRESETS};
pub use run::{crossval_point, crossvalidate, run_all, run_point, simulate, simulate_alpha, CrossvalReport};
