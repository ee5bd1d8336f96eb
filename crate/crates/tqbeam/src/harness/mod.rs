//! Experiment orchestration: configuration, seeded Monte-Carlo sweeps, and
//! CSV/JSON emission.
//!
//! Outer beamformers are statistics-only, so every sweep designs them once
//! per covariance configuration and reuses them across all trials. Trials own
//! independent RNG substreams keyed by `(seed, trial, group)`, results are
//! aggregated in trial order, and floats are printed with ten significant
//! digits, which together make the emitted CSV byte-identical across reruns
//! and across worker counts.

mod config;
mod output;
mod runner;

pub use config::{Experiment, ExperimentConfig};
pub use output::{
    convergence_to_csv_string, format_sig10, rows_to_csv_string, write_json, ResultRow,
    RESULT_CSV_HEADER,
};
pub use runner::{
    run_as_sweep, run_convergence_trace, run_experiment_to_files, run_power_breakdown,
    run_sumrate_vs_power, with_threads, ConvergenceResult, ExperimentResult, GroupTrace,
};
