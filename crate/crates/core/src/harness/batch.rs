//! Trial fan-out, metrics and output files.
//!
//! A batch writes into its output directory:
//!
//! * `trial_NNN.csv`, one row per distribution per snapshot;
//! * `aggregate.csv`, medians across trials per snapshot iteration;
//! * `summary.json`, config echo and per-trial results;
//! * `timings.json`, wall-clock times.
//!
//! Everything except `timings.json` depends only on the config, so two runs
//! with the same master seed produce identical bytes at any thread count.

use std::f64::consts::{FRAC_PI_6, PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ConfigMap, RunConfig, TruthSpec};
use crate::engine::{run, DistSnapshot, Snapshot, TrajectoryLog, DEAD_WEIGHT};
use crate::error::{Error, Result};
use crate::postprocess::{collate, filter_estimates, nearest_truth, success_check, PhaseEstimate};
use crate::simulator::{trial_seed, GroundTruth, TrialRng};

/// σ written for distributions whose weight is below [`DEAD_WEIGHT`].
pub const DEAD_SIGMA: f64 = 20.0;

pub const TRAJECTORY_HEADER: &str = "iteration,dist_id,repr,mean,sigma,weight,k1";
pub const AGGREGATE_HEADER: &str = "iteration,median_phase_error,median_sigma,median_weight_error";

/// RNG for drawing a trial's ground truth. Shares the trial seed with the
/// estimator but uses a separate ChaCha stream.
pub fn truth_rng(master: u64, trial: u64) -> TrialRng {
    let mut rng = TrialRng::seed_from_u64(trial_seed(master, trial));
    rng.set_stream(1);
    rng
}

pub fn generate_truth<R: Rng + ?Sized>(spec: &TruthSpec, rng: &mut R) -> Result<GroundTruth> {
    match spec {
        TruthSpec::Explicit { phases, weights } => exact_or_normalized(phases.clone(), weights.clone()),
        TruthSpec::Spurious { count } => {
            let mut phases = vec![2.0, 4.0, 5.0];
            let mut weights = vec![0.45, 0.27, 0.18];
            let extra: Vec<(f64, f64)> = (0..*count).map(|_| (rng.gen_range(0.0..TAU), rng.gen::<f64>())).collect();
            let total: f64 = extra.iter().map(|e| e.1).sum();
            if *count > 0 && !(total > 0.0) {
                return Err(Error::Config("spurious weights cannot be normalized".into()));
            }
            for (p, w) in extra {
                phases.push(p);
                weights.push(0.1 * w / total);
            }
            exact_or_normalized(phases, weights)
        }
        TruthSpec::Grid { count } => {
            let phases = (0..*count)
                .map(|i| PI / 12.0 + i as f64 * FRAC_PI_6 + rng.gen_range(-0.05..=0.05))
                .collect();
            let weights = (0..*count).map(|_| rng.gen_range(0.5..=1.0)).collect();
            GroundTruth::normalized(phases, weights)
        }
    }
}

/// Keeps weights that already sum to one untouched.
fn exact_or_normalized(phases: Vec<f64>, weights: Vec<f64>) -> Result<GroundTruth> {
    GroundTruth::new(phases.clone(), weights.clone()).or_else(|_| GroundTruth::normalized(phases, weights))
}

pub fn reported_sigma(d: &DistSnapshot, weight: f64) -> f64 {
    if weight < DEAD_WEIGHT {
        DEAD_SIGMA
    } else {
        d.sigma
    }
}

/// Estimates of one snapshot. Distributions without a defined mean count
/// with zero weight.
pub fn estimates_at(snapshot: &Snapshot) -> Vec<PhaseEstimate> {
    snapshot
        .dists
        .iter()
        .zip(&snapshot.weights)
        .map(|(d, &w)| {
            if d.mean.is_finite() {
                PhaseEstimate::new(d.mean, w)
            } else {
                PhaseEstimate::new(0.0, 0.0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotMetrics {
    pub iteration: usize,
    /// Mean over truth phases of the collated phase error.
    pub phase_error: f64,
    /// Mean over truth phases of the reported σ of the heaviest matched
    /// distribution (`DEAD_SIGMA` if none).
    pub sigma: f64,
    /// Mean over truth phases of the absolute collated weight error.
    pub weight_error: f64,
}

/// The snapshot fixing the assignment: the last one at or before
/// `reference`, or the final one.
pub fn reference_snapshot(snapshots: &[Snapshot], reference: Option<usize>) -> &Snapshot {
    match reference {
        Some(r) => snapshots.iter().rev().find(|s| s.iteration <= r).unwrap_or(&snapshots[0]),
        None => snapshots.last().expect("at least the initial snapshot"),
    }
}

pub fn trial_metrics(snapshots: &[Snapshot], truth: &GroundTruth, reference: Option<usize>) -> Vec<SnapshotMetrics> {
    let reference = reference_snapshot(snapshots, reference);
    let assignment: Vec<usize> = estimates_at(reference)
        .iter()
        .map(|e| nearest_truth(e.phase, truth))
        .collect();
    snapshots
        .iter()
        .map(|s| {
            let matching = collate(&estimates_at(s), truth, &assignment);
            let sigma = (0..truth.len())
                .map(|t| {
                    let mut best: Option<(f64, f64)> = None;
                    for (j, (d, &w)) in s.dists.iter().zip(&s.weights).enumerate() {
                        if assignment[j] == t && best.map_or(true, |(bw, _)| w > bw) {
                            best = Some((w, reported_sigma(d, w)));
                        }
                    }
                    best.map_or(DEAD_SIGMA, |b| b.1)
                })
                .sum::<f64>()
                / truth.len() as f64;
            SnapshotMetrics {
                iteration: s.iteration,
                phase_error: matching.mean_phase_error(),
                sigma,
                weight_error: matching.mean_weight_error(),
            }
        })
        .collect()
}

/// Final estimates with their recorded mean histories.
pub fn final_estimates(log: &TrajectoryLog) -> Vec<PhaseEstimate> {
    let last = log.last();
    estimates_at(last)
        .into_iter()
        .enumerate()
        .map(|(j, e)| {
            let history = log.snapshots.iter().map(|s| (s.iteration, s.dists[j].mean)).collect();
            e.with_history(history)
        })
        .collect()
}

/// Median with the mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub truth: GroundTruth,
    pub log: TrajectoryLog,
    pub metrics: Vec<SnapshotMetrics>,
    pub filtered: Vec<PhaseEstimate>,
    pub success: bool,
    pub seconds: f64,
}

pub fn run_trial(cfg: &RunConfig, trial: usize) -> Result<TrialOutcome> {
    let start = Instant::now();
    let master = cfg.estimator.seed;
    let truth = generate_truth(&cfg.truth, &mut truth_rng(master, trial as u64))?;
    let seed = trial_seed(master, trial as u64);
    let mut est = cfg.estimator.clone();
    est.seed = seed;
    let log = run(&est, &truth)?;
    let metrics = trial_metrics(&log.snapshots, &truth, cfg.reference_iteration);
    let filtered = filter_estimates(&final_estimates(&log), &cfg.filter);
    let success = success_check(&filtered, &truth, cfg.success_tol);
    Ok(TrialOutcome {
        trial,
        seed,
        truth,
        log,
        metrics,
        filtered,
        success,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Medians across trials per snapshot iteration. All trials share the same
/// snapshot grid.
pub fn aggregate(outcomes: &[TrialOutcome]) -> Vec<SnapshotMetrics> {
    let Some(first) = outcomes.first() else { return Vec::new() };
    (0..first.metrics.len())
        .map(|i| {
            let col = |f: fn(&SnapshotMetrics) -> f64| median(&outcomes.iter().map(|o| f(&o.metrics[i])).collect::<Vec<_>>());
            SnapshotMetrics {
                iteration: first.metrics[i].iteration,
                phase_error: col(|m| m.phase_error),
                sigma: col(|m| m.sigma),
                weight_error: col(|m| m.weight_error),
            }
        })
        .collect()
}

pub fn trajectory_csv(log: &TrajectoryLog) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &log.snapshots {
        let k1 = s.k.first().map(|k| k.to_string()).unwrap_or_default();
        for (j, (d, &w)) in s.dists.iter().zip(&s.weights).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.iteration,
                j,
                d.repr.as_str(),
                d.mean,
                reported_sigma(d, w),
                w,
                k1
            )
            .expect("writing to a String");
        }
    }
    out
}

pub fn aggregate_csv(rows: &[SnapshotMetrics]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.iteration, r.phase_error, r.sigma, r.weight_error).expect("writing to a String");
    }
    out
}

#[derive(Serialize)]
struct TruthJson<'a> {
    phases: &'a [f64],
    weights: &'a [f64],
}

#[derive(Serialize)]
struct EstimateJson {
    phase: f64,
    weight: f64,
}

#[derive(Serialize)]
struct TrialJson<'a> {
    trial: usize,
    seed: u64,
    truth: TruthJson<'a>,
    diverged_at: Option<usize>,
    divergence_reason: Option<&'a str>,
    switch_iterations: &'a [Option<usize>],
    degenerate_refits: usize,
    weight_solves: usize,
    final_metrics: Option<&'a SnapshotMetrics>,
    filtered: Vec<EstimateJson>,
    success: bool,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    config: &'a ConfigMap,
    trials: usize,
    successes: usize,
    diverged: usize,
    sigma_crit: f64,
    results: Vec<TrialJson<'a>>,
}

#[derive(Serialize)]
struct TimingsJson {
    threads: usize,
    wall_seconds: f64,
    trial_seconds: Vec<f64>,
}

pub fn summary_json(cfg: &RunConfig, outcomes: &[TrialOutcome]) -> String {
    let config = cfg.to_map();
    let summary = SummaryJson {
        config: &config,
        trials: outcomes.len(),
        successes: outcomes.iter().filter(|o| o.success).count(),
        diverged: outcomes.iter().filter(|o| o.log.diverged_at.is_some()).count(),
        sigma_crit: outcomes.first().map_or(f64::NAN, |o| o.log.sigma_crit),
        results: outcomes
            .iter()
            .map(|o| TrialJson {
                trial: o.trial,
                seed: o.seed,
                truth: TruthJson {
                    phases: o.truth.phases(),
                    weights: o.truth.weights(),
                },
                diverged_at: o.log.diverged_at,
                divergence_reason: o.log.divergence_reason.as_deref(),
                switch_iterations: &o.log.switch_iterations,
                degenerate_refits: o.log.degenerate_refits,
                weight_solves: o.log.weight_solves,
                final_metrics: o.metrics.last(),
                filtered: o
                    .filtered
                    .iter()
                    .map(|e| EstimateJson {
                        phase: e.phase,
                        weight: e.weight,
                    })
                    .collect(),
                success: o.success,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub outcomes: Vec<TrialOutcome>,
    pub aggregate: Vec<SnapshotMetrics>,
    pub wall_seconds: f64,
}

fn prepare_output_dir(dir: &Path) -> Result<()> {
    let fail = |e: std::io::Error| Error::Io(format!("output directory {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".bqpe-write-probe");
    fs::write(&probe, b"").map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)?;
    Ok(())
}

/// Runs every trial in parallel and writes the output files.
pub fn run_batch(cfg: &RunConfig) -> Result<BatchReport> {
    cfg.validate()?;
    prepare_output_dir(&cfg.out)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t))
            .collect::<Result<Vec<_>>>()
    })?;
    let rows = aggregate(&outcomes);
    let wall_seconds = start.elapsed().as_secs_f64();

    let width = (cfg.trials - 1).to_string().len().max(3);
    for o in &outcomes {
        fs::write(cfg.out.join(format!("trial_{:0width$}.csv", o.trial)), trajectory_csv(&o.log))?;
    }
    fs::write(cfg.out.join("aggregate.csv"), aggregate_csv(&rows))?;
    fs::write(cfg.out.join("summary.json"), summary_json(cfg, &outcomes))?;
    let timings = TimingsJson {
        threads: pool.current_num_threads(),
        wall_seconds,
        trial_seconds: outcomes.iter().map(|o| o.seconds).collect(),
    };
    fs::write(
        cfg.out.join("timings.json"),
        serde_json::to_string_pretty(&timings).expect("timings serialize") + "\n",
    )?;
    Ok(BatchReport {
        outcomes,
        aggregate: rows,
        wall_seconds,
    })
}
