//! Declarative experiment runner behind the `geodrive` binary.

mod config;
mod presets;
mod run;

pub use config::{default_theta0, env_digits, DigitsSource, DriveConfig, ExperimentConfig, Kind, Numerics, DIGITS_ENV};
pub use presets::{preset_runs, run_preset, Check, PresetOptions, PresetReport, PresetRun, GOLDEN, PRESETS};
pub use run::{describe, invariant_of, late_quarter_maxima, run_config, run_path, RunManifest};

use crate::Error;

/// Process exit code for an error: 2 for configuration problems, 3 for
/// failures while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        _ => 3,
    }
}
