//! Experiment runner for Gaussian non-Markovianity witnesses: configs, sweeps and CSV traces.

// negated float comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{preset, ExperimentConfig, Overrides, StateKind, WitnessKind, PRESETS};
pub use error::{CliError, CliResult};
pub use output::emit_csv;
pub use runner::{run, Bundle, Run, SweepPoint};

/// Loads `text`, runs it and writes the CSV files. Returns the bundle and the written paths.
pub fn execute(text: &str, overrides: &Overrides) -> CliResult<(Bundle, Vec<std::path::PathBuf>)> {
    let config = ExperimentConfig::from_toml(text, overrides)?;
    let bundle = run(&config)?;
    let files = emit_csv(&bundle, &config.output_dir)?;
    Ok((bundle, files))
}
