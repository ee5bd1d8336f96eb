//! Monte-Carlo experiment engines.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{db_to_linear, Experiment, ExperimentConfig};
use super::output::{convergence_to_csv_string, rows_to_csv_string, write_json, ResultRow};
use crate::channel::{trial_substream, ChannelSampler, GroupChannel};
use crate::error::{Error, Result};
use crate::inner::{is_full_row_rank, rzf_from_effective, zf_from_effective, InnerBeamformer, InnerKind};
use crate::metrics::{IntraGroup, TrialMetrics};
use crate::outer::{
    build_leakage_matrix, build_signal_matrix, design_outer, solve_tqp, OuterMethod, Scenario,
    DEFAULT_MAX_ITER,
};
use crate::spectral::{CMat, HermitianMatrix};

/// Cap on redraws of a single trial's channel set before giving up.
const MAX_RESAMPLES_PER_TRIAL: usize = 1000;

/// Aggregated rows plus run diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    /// Number of channel redraws forced by rank-deficient effective channels.
    pub resampled_trials: usize,
}

/// Objective trace of the trace-quotient solver for one group.
#[derive(Debug, Clone, Serialize)]
pub struct GroupTrace {
    pub group: usize,
    pub rho_trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceResult {
    pub traces: Vec<GroupTrace>,
}

/// Runs a closure inside a dedicated rayon pool of `threads` workers
/// (0 = use the global pool). Results are aggregated in trial order either
/// way, so the emitted bytes do not depend on the worker count.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build thread pool")
            .install(f)
    }
}

/// Average sum rate (and power breakdown) versus transmit power.
pub fn run_sumrate_vs_power(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_power_grid(cfg, Experiment::Sumrate)
}

/// Signal/leakage power emphasis of the same sweep.
pub fn run_power_breakdown(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_power_grid(cfg, Experiment::Power)
}

fn run_power_grid(cfg: &ExperimentConfig, experiment: Experiment) -> Result<ExperimentResult> {
    cfg.validate()?;
    let covariances = cfg.covariances(None)?;
    let (rows, resampled_trials) = run_grid_cell(
        cfg,
        experiment,
        &covariances,
        cfg.nominal_delta_rad(),
        &cfg.pt_db,
    )?;
    Ok(ExperimentResult {
        rows,
        resampled_trials,
    })
}

/// Average sum rate versus angle spread at the first configured transmit
/// power. Covariances are rebuilt for every grid spread.
pub fn run_as_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.as_grid_deg.is_empty() {
        return Err(Error::Config(
            "as-sweep requires a non-empty as_grid_deg".into(),
        ));
    }
    let pt = [cfg.pt_db[0]];
    let mut rows = Vec::new();
    let mut resampled_trials = 0;
    for &delta_deg in &cfg.as_grid_deg {
        let delta_rad = delta_deg.to_radians();
        let covariances = cfg.covariances(Some(delta_rad))?;
        let (mut cell_rows, resampled) =
            run_grid_cell(cfg, Experiment::AsSweep, &covariances, delta_rad, &pt)?;
        rows.append(&mut cell_rows);
        resampled_trials += resampled;
    }
    Ok(ExperimentResult {
        rows,
        resampled_trials,
    })
}

/// Trace-quotient objective trajectory per group on the configured scenario.
pub fn run_convergence_trace(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    if !cfg.methods.contains(&OuterMethod::Tqp) {
        return Err(Error::Config(
            "convergence experiment requires the TQP method".into(),
        ));
    }
    let covariances = cfg.covariances(None)?;
    let scenario = cfg.scenario(&covariances, cfg.pt_db[0])?;
    let mut traces = Vec::with_capacity(scenario.group_count());
    for g in 0..scenario.group_count() {
        let r1 = build_signal_matrix(&scenario, g)?;
        let r2 = build_leakage_matrix(&scenario, g)?;
        let out = solve_tqp(&r1, &r2, scenario.groups[g].outer_dim, cfg.eps, DEFAULT_MAX_ITER)?;
        traces.push(GroupTrace {
            group: g,
            rho_trace: out.rho_trace,
        });
    }
    Ok(ConvergenceResult { traces })
}

struct MethodDesign {
    method: OuterMethod,
    outers: Vec<CMat>,
    mean_iters: f64,
}

#[derive(Clone, Copy, Default)]
struct CellAccum {
    sum_rate: f64,
    signal: f64,
    leakage: f64,
}

struct TrialOutcome {
    /// One entry per (method, power) cell, methods outermost.
    cells: Vec<CellAccum>,
    resamples: usize,
}

fn design_all_methods(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<Vec<MethodDesign>> {
    cfg.methods
        .iter()
        .map(|&method| {
            let mut outers = Vec::with_capacity(scenario.group_count());
            let mut iter_sum = 0usize;
            for g in 0..scenario.group_count() {
                let out = design_outer(
                    scenario,
                    g,
                    method,
                    cfg.eps,
                    DEFAULT_MAX_ITER,
                    cfg.w,
                    cfg.energy_threshold,
                )?;
                iter_sum += out.iterations;
                outers.push(out.matrix);
            }
            Ok(MethodDesign {
                method,
                outers,
                mean_iters: iter_sum as f64 / scenario.group_count() as f64,
            })
        })
        .collect()
}

/// Runs all trials for one covariance configuration over a transmit-power
/// grid and aggregates the rows, ordered grid point outermost and method
/// innermost (the config's method order).
fn run_grid_cell(
    cfg: &ExperimentConfig,
    experiment: Experiment,
    covariances: &[HermitianMatrix],
    delta_rad: f64,
    pt_db_grid: &[f64],
) -> Result<(Vec<ResultRow>, usize)> {
    let scenario = cfg.scenario(covariances, pt_db_grid[0])?;
    let designs = design_all_methods(cfg, &scenario)?;
    let samplers: Vec<ChannelSampler> = covariances
        .iter()
        .map(ChannelSampler::new)
        .collect::<Result<_>>()?;
    let users_per_group: Vec<usize> = scenario.groups.iter().map(|g| g.users).collect();
    let total_users = scenario.total_users();
    let pts_linear: Vec<f64> = pt_db_grid.iter().map(|&db| db_to_linear(db)).collect();
    let intra = match cfg.inner {
        InnerKind::Zf => IntraGroup::Omit,
        InnerKind::Rzf => IntraGroup::Include,
    };

    let evaluate_trial = |trial: usize| -> Result<TrialOutcome> {
        let mut rngs: Vec<_> = (0..samplers.len())
            .map(|g| trial_substream(cfg.seed, trial as u64, g as u64))
            .collect();

        // Redraw the whole channel set until every (method, group) effective
        // channel is full rank, so all methods see identical realizations.
        let mut resamples = 0usize;
        let (channels, eff_channels) = loop {
            let channels: Vec<GroupChannel> = samplers
                .iter()
                .zip(rngs.iter_mut())
                .zip(users_per_group.iter())
                .map(|((sampler, rng), &users)| sampler.sample_group(users, rng))
                .collect::<Result<_>>()?;
            let eff: Vec<Vec<CMat>> = designs
                .iter()
                .map(|design| {
                    design
                        .outers
                        .iter()
                        .zip(channels.iter())
                        .map(|(v, h)| h.as_matrix() * v)
                        .collect()
                })
                .collect();
            if eff
                .iter()
                .all(|per_group| per_group.iter().all(is_full_row_rank))
            {
                break (channels, eff);
            }
            resamples += 1;
            if resamples > MAX_RESAMPLES_PER_TRIAL {
                return Err(Error::SingularChannel);
            }
        };

        let mut cells = Vec::with_capacity(designs.len() * pts_linear.len());
        for (design, effs) in designs.iter().zip(eff_channels.iter()) {
            match cfg.inner {
                InnerKind::Zf => {
                    // ZF beams do not depend on the transmit power.
                    let inners: Vec<InnerBeamformer> =
                        effs.iter().map(zf_from_effective).collect::<Result<_>>()?;
                    for &pt_lin in &pts_linear {
                        let p = pt_lin / total_users as f64;
                        let m = TrialMetrics::evaluate(
                            &channels,
                            &design.outers,
                            &inners,
                            cfg.sigma2,
                            p,
                            intra,
                        )?;
                        cells.push(CellAccum {
                            sum_rate: m.sum_rate,
                            signal: m.signal_power,
                            leakage: m.leakage_power,
                        });
                    }
                }
                InnerKind::Rzf => {
                    for &pt_lin in &pts_linear {
                        let alpha = total_users as f64 / pt_lin;
                        let inners: Vec<InnerBeamformer> = effs
                            .iter()
                            .map(|e| rzf_from_effective(e, alpha))
                            .collect::<Result<_>>()?;
                        let p = pt_lin / total_users as f64;
                        let m = TrialMetrics::evaluate(
                            &channels,
                            &design.outers,
                            &inners,
                            cfg.sigma2,
                            p,
                            intra,
                        )?;
                        cells.push(CellAccum {
                            sum_rate: m.sum_rate,
                            signal: m.signal_power,
                            leakage: m.leakage_power,
                        });
                    }
                }
            }
        }
        Ok(TrialOutcome { cells, resamples })
    };

    let outcomes: Vec<Result<TrialOutcome>> =
        (0..cfg.trials).into_par_iter().map(evaluate_trial).collect();
    let outcomes: Vec<TrialOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let resampled_trials = outcomes.iter().map(|o| o.resamples).sum();

    // Aggregate in trial order: two passes give mean and sample standard
    // error independent of the execution schedule.
    let n = cfg.trials as f64;
    let mut rows = Vec::with_capacity(pts_linear.len() * designs.len());
    for (pi, &pt_db) in pt_db_grid.iter().enumerate() {
        for (mi, design) in designs.iter().enumerate() {
            let cell = mi * pts_linear.len() + pi;
            let mean_of = |f: &dyn Fn(&CellAccum) -> f64| -> f64 {
                outcomes.iter().map(|o| f(&o.cells[cell])).sum::<f64>() / n
            };
            let mean_sum_rate = mean_of(&|c| c.sum_rate);
            let mean_signal = mean_of(&|c| c.signal);
            let mean_leakage = mean_of(&|c| c.leakage);
            let se_sum_rate = if cfg.trials > 1 {
                let var = outcomes
                    .iter()
                    .map(|o| {
                        let d = o.cells[cell].sum_rate - mean_sum_rate;
                        d * d
                    })
                    .sum::<f64>()
                    / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            rows.push(ResultRow {
                experiment: experiment.to_string(),
                method: design.method,
                inner: cfg.inner,
                pt_db,
                delta_rad,
                trials: cfg.trials,
                mean_sum_rate,
                se_sum_rate,
                mean_signal,
                mean_leakage,
                mean_iters: design.mean_iters,
            });
        }
    }
    Ok((rows, resampled_trials))
}

/// Summary of a finished run, for CLI reporting.
#[derive(Debug, Clone, Copy)]
pub struct RunSummary {
    pub rows: usize,
    pub resampled_trials: usize,
}

/// Dispatches an experiment and writes its CSV (and optional JSON mirror),
/// creating parent directories as needed.
pub fn run_experiment_to_files(
    cfg: &ExperimentConfig,
    experiment: Experiment,
    csv_path: &Path,
    json_path: Option<&Path>,
) -> Result<RunSummary> {
    for path in std::iter::once(csv_path).chain(json_path) {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
    }
    match experiment {
        Experiment::Sumrate | Experiment::Power | Experiment::AsSweep => {
            let result = match experiment {
                Experiment::Sumrate => run_sumrate_vs_power(cfg)?,
                Experiment::Power => run_power_breakdown(cfg)?,
                Experiment::AsSweep => run_as_sweep(cfg)?,
                Experiment::Convergence => unreachable!(),
            };
            std::fs::write(csv_path, rows_to_csv_string(&result.rows))?;
            if let Some(path) = json_path {
                write_json(path, &result)?;
            }
            Ok(RunSummary {
                rows: result.rows.len(),
                resampled_trials: result.resampled_trials,
            })
        }
        Experiment::Convergence => {
            let result = run_convergence_trace(cfg)?;
            std::fs::write(
                csv_path,
                convergence_to_csv_string(experiment.as_str(), &result.traces),
            )?;
            if let Some(path) = json_path {
                write_json(path, &result)?;
            }
            Ok(RunSummary {
                rows: result.traces.iter().map(|t| t.rho_trace.len()).sum(),
                resampled_trials: 0,
            })
        }
    }
}
