//! Command-line front end for the Monte-Carlo experiment harness.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when the
//! trace-quotient solver fails to converge, 1 on anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tqbeam::harness::{run_experiment_to_files, with_threads, Experiment, ExperimentConfig};
use tqbeam::outer::OuterMethod;
use tqbeam::Error;

#[derive(Parser, Debug)]
#[command(
    name = "tqbeam",
    version,
    about = "Two-stage beamforming link simulator: statistics-only outer beamformer \
             designs evaluated by seeded Monte-Carlo sweeps"
)]
struct Cli {
    /// Experiment configuration (flat JSON).
    #[arg(long)]
    config: PathBuf,

    /// Which experiment to run.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Experiment,

    /// CSV output path (overrides the config's `output` field).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Optional JSON mirror of the results.
    #[arg(long)]
    json: Option<PathBuf>,

    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Trial-count override.
    #[arg(long)]
    trials: Option<usize>,

    /// Comma-separated method subset override (TQP,P3_SVD,WEIGHTED_DIFF,BD).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,

    /// Worker threads for the trial loop (0 = rayon default). The output is
    /// identical for every thread count.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::from_json_file(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(methods) = &cli.methods {
        cfg.methods = methods
            .iter()
            .map(|m| m.parse::<OuterMethod>())
            .collect::<Result<_, _>>()?;
    }
    cfg.validate()?;

    let csv_path = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| {
            Error::Config("no output path: pass --out or set `output` in the config".into())
        })?;

    let summary = with_threads(cli.threads, || {
        run_experiment_to_files(&cfg, cli.experiment, &csv_path, cli.json.as_deref())
    })?;
    println!(
        "{}: wrote {} rows to {} ({} resampled draws)",
        cli.experiment,
        summary.rows,
        csv_path.display(),
        summary.resampled_trials
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
