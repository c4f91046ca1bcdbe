//! Density sweeps over both engines, TOML configuration and CSV output.

mod config;
mod output;
mod sweep;

pub use config::{
    BoundSelection, Engines, Environment, SweepConfig, DEFAULT_DENSITIES, DEFAULT_SEED, DEFAULT_TRIALS, SWEEP_PRESETS,
};
pub use output::{format_sig6, write_csv, write_csv_file, CSV_HEADER};
pub use sweep::{
    find_optimal_density, run_sweep, validate_engines, Metric, SweepRow, ValidationCell, ORACLE_TOLERANCE,
};
