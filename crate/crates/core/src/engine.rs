//! The Bayesian update loop over several phase distributions.
//!
//! Each experiment produces a likelihood series `L`. For every tracked
//! distribution `P_j` the engine computes `C_j = ∫ P_j L`, forms the marginal
//! `Σ_j C_j w_j`, and updates
//!
//! ```text
//! P_j ← P_j · (Σ_{i≠j} C_i w_i + w_j L) / marginal
//! ```
//!
//! Fourier-represented distributions are updated exactly, truncated to
//! `n_max` and renormalized. Normal-represented distributions are refitted by
//! closed-form moment matching. In mixed mode a Fourier distribution switches
//! to normal form, once and for good, when its Holevo σ drops below the
//! critical σ of the truncation error bound.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::likelihood::{likelihood_series, ExperimentDesign, MeasurementRecord, NoiseModel};
use crate::simulator::{simulate_experiment, GroundTruth, SchemeKind, SchemeState, TrialRng};
use crate::weights::{LikelihoodLedger, SolverOptions, WeightState};
use crate::wrapped_normal::{critical_sigma, posterior_moment, WrappedNormal, SIGMA_FLOOR};

/// Weights below this are treated as dead distributions by reporting code.
pub const DEAD_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepresentationMode {
    FourierOnly,
    NormalOnly,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReprTag {
    Fourier,
    Normal,
}

impl ReprTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReprTag::Fourier => "fourier",
            ReprTag::Normal => "normal",
        }
    }
}

/// Posterior over a single eigenphase.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseDistribution {
    Fourier(FourierSeries),
    Normal(WrappedNormal),
}

impl PhaseDistribution {
    pub fn tag(&self) -> ReprTag {
        match self {
            PhaseDistribution::Fourier(_) => ReprTag::Fourier,
            PhaseDistribution::Normal(_) => ReprTag::Normal,
        }
    }

    /// Circular mean and standard deviation. For Fourier form σ is the square
    /// root of the Holevo variance (zero if rounding made it negative); the
    /// mean of a distribution without first harmonic is reported as NaN.
    pub fn mean_sigma(&self) -> (f64, f64) {
        match self {
            PhaseDistribution::Normal(d) => (d.mu(), d.sigma()),
            PhaseDistribution::Fourier(s) => match s.moments() {
                Ok((mean, var)) => (mean, var.max(0.0).sqrt()),
                Err(_) => (f64::NAN, f64::INFINITY),
            },
        }
    }
}

/// `C = ∫ P(φ) L(φ) dφ` for either representation.
pub fn compute_c(dist: &PhaseDistribution, likelihood: &FourierSeries) -> Result<f64> {
    let c = match dist {
        PhaseDistribution::Fourier(s) => s.inner_product(likelihood),
        PhaseDistribution::Normal(d) => d.expectation(likelihood),
    };
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidLikelihoodMass { value: c });
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackedDistribution {
    pub dist: PhaseDistribution,
    /// Iteration at which the distribution switched to normal form.
    pub switch_iteration: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub num_distributions: usize,
    pub n_max: usize,
    pub epsilon: f64,
    pub mode: RepresentationMode,
    pub scheme: SchemeKind,
    pub noise: NoiseModel,
    pub schedule_t: usize,
    pub init_sigma: f64,
    pub iterations: usize,
    pub seed: u64,
    pub solver: SolverOptions,
    pub snapshots_per_decade: usize,
    /// Record every iteration instead of the logarithmic grid.
    pub log_every_iteration: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            num_distributions: 1,
            n_max: 200,
            epsilon: 1e-4,
            mode: RepresentationMode::Mixed,
            scheme: SchemeKind::Fixed { k: vec![1, 2, 5] },
            noise: NoiseModel::Ideal,
            schedule_t: 512,
            init_sigma: 3.0,
            iterations: 10_000,
            seed: 0,
            solver: SolverOptions::default(),
            snapshots_per_decade: 50,
            log_every_iteration: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_distributions == 0 {
            return bad("at least one distribution is required".into());
        }
        if self.n_max == 0 {
            return bad("n_max must be positive".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.init_sigma > 0.0) || !self.init_sigma.is_finite() {
            return bad(format!("init_sigma must be positive, got {}", self.init_sigma));
        }
        if self.schedule_t == 0 {
            return bad("weight schedule T must be positive".into());
        }
        self.scheme.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Outcome of one successful update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub c: Vec<f64>,
    pub marginal: f64,
    /// Distributions converted to normal form during this step.
    pub switched: Vec<usize>,
    pub weights_solved: bool,
    /// Normal refits whose σ was clamped to the floor.
    pub degenerate_refits: usize,
}

/// Everything that evolves during a trial.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    dists: Vec<TrackedDistribution>,
    weights: WeightState,
    ledger: LikelihoodLedger,
    sigma_crit: f64,
    iteration: usize,
    n_max: usize,
    mode: RepresentationMode,
    noise: NoiseModel,
    solver: SolverOptions,
}

/// Prior means `2π(j + ½)/m`.
pub fn initial_means(m: usize) -> Vec<f64> {
    (0..m).map(|j| TAU * (j as f64 + 0.5) / m as f64).collect()
}

impl EstimatorState {
    /// Equally spaced priors of width `init_sigma` and uniform weights.
    pub fn init(config: &EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let dists = initial_means(config.num_distributions)
            .into_iter()
            .map(|mu| {
                let normal = WrappedNormal::new(mu, config.init_sigma)?;
                let dist = match config.mode {
                    RepresentationMode::NormalOnly => PhaseDistribution::Normal(normal),
                    _ => PhaseDistribution::Fourier(normal.to_fourier(config.n_max)),
                };
                Ok(dist)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_distributions(dists, config)
    }

    /// State with caller-supplied priors and uniform weights.
    pub fn with_distributions(dists: Vec<PhaseDistribution>, config: &EstimatorConfig) -> Result<Self> {
        let m = dists.len();
        if m == 0 {
            return Err(Error::Config("at least one distribution is required".into()));
        }
        Ok(Self {
            dists: dists
                .into_iter()
                .map(|dist| TrackedDistribution {
                    dist,
                    switch_iteration: None,
                })
                .collect(),
            weights: WeightState::uniform(m, config.schedule_t),
            ledger: LikelihoodLedger::new(m),
            sigma_crit: critical_sigma(config.n_max, config.epsilon)?,
            iteration: 0,
            n_max: config.n_max,
            mode: config.mode,
            noise: config.noise,
            solver: config.solver,
        })
    }

    pub fn distributions(&self) -> &[TrackedDistribution] {
        &self.dists
    }

    pub fn weights(&self) -> &[f64] {
        self.weights.weights()
    }

    pub fn weight_state(&self) -> &WeightState {
        &self.weights
    }

    pub fn ledger(&self) -> &LikelihoodLedger {
        &self.ledger
    }

    pub fn sigma_crit(&self) -> f64 {
        self.sigma_crit
    }

    /// Number of completed updates.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// `(weight, σ)` per distribution, as read by adaptive schemes.
    pub fn summary(&self) -> Vec<(f64, f64)> {
        self.dists
            .iter()
            .zip(self.weights())
            .map(|(d, &w)| (w, d.dist.mean_sigma().1))
            .collect()
    }

    /// Marginal probability of a likelihood under the current state.
    pub fn marginal(&self, likelihood: &FourierSeries) -> Result<f64> {
        let mut total = 0.0;
        for (d, &w) in self.dists.iter().zip(self.weights()) {
            total += compute_c(&d.dist, likelihood)? * w;
        }
        Ok(total)
    }

    /// Applies one experiment. On error the state is left untouched.
    pub fn step(&mut self, design: &ExperimentDesign, m: &MeasurementRecord) -> Result<StepReport> {
        let iteration = self.iteration + 1;
        let breakdown = |reason: String| Error::UpdateBreakdown { iteration, reason };

        let likelihood = likelihood_series(design, m, self.noise)?;
        let c = self
            .dists
            .iter()
            .map(|d| compute_c(&d.dist, &likelihood))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| breakdown(e.to_string()))?;
        let w = self.weights.weights().to_vec();
        let contributions: Vec<f64> = c.iter().zip(&w).map(|(c, w)| c * w).collect();
        let marginal: f64 = contributions.iter().sum();
        if !(marginal > 0.0) || !marginal.is_finite() {
            return Err(breakdown(format!("marginal probability {marginal}")));
        }

        let mut updated = Vec::with_capacity(self.dists.len());
        let mut degenerate_refits = 0;
        for (j, tracked) in self.dists.iter().enumerate() {
            let background: f64 = contributions
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, v)| v)
                .sum();
            let dist = match &tracked.dist {
                PhaseDistribution::Fourier(series) => {
                    let product = series.multiply(&likelihood);
                    let next = series
                        .add_scaled(background / marginal, &product, w[j] / marginal)
                        .truncate(self.n_max)
                        .normalize()
                        .map_err(|e| breakdown(format!("distribution {j}: {e}")))?;
                    if !next.is_finite() {
                        return Err(breakdown(format!("distribution {j}: non-finite coefficients")));
                    }
                    PhaseDistribution::Fourier(next)
                }
                PhaseDistribution::Normal(d) => {
                    let refit = posterior_moment(d, &likelihood, background, w[j], marginal)
                        .map_err(|e| breakdown(format!("distribution {j}: {e}")))?;
                    degenerate_refits += usize::from(refit.degenerate);
                    PhaseDistribution::Normal(refit.normal)
                }
            };
            updated.push(dist);
        }

        let mut switched = Vec::new();
        if self.mode == RepresentationMode::Mixed {
            for (j, dist) in updated.iter_mut().enumerate() {
                if let PhaseDistribution::Fourier(series) = dist {
                    let Ok((mean, var)) = series.moments() else { continue };
                    let sigma = var.max(0.0).sqrt();
                    if sigma < self.sigma_crit {
                        let normal = WrappedNormal::new(mean, sigma.max(SIGMA_FLOOR))
                            .map_err(|e| breakdown(format!("distribution {j}: {e}")))?;
                        *dist = PhaseDistribution::Normal(normal);
                        switched.push(j);
                    }
                }
            }
        }

        let mut ledger = self.ledger.clone();
        ledger.push(&c).map_err(|e| breakdown(e.to_string()))?;
        let mut weights = self.weights.clone();
        let weights_solved = weights
            .update(&ledger, iteration, &self.solver)
            .map_err(|e| breakdown(format!("weight solve: {e}")))?;

        for (tracked, dist) in self.dists.iter_mut().zip(updated) {
            tracked.dist = dist;
        }
        for &j in &switched {
            self.dists[j].switch_iteration = Some(iteration);
        }
        self.ledger = ledger;
        self.weights = weights;
        self.iteration = iteration;
        Ok(StepReport {
            c,
            marginal,
            switched,
            weights_solved,
            degenerate_refits,
        })
    }

    pub fn snapshot(&self, design: Option<&ExperimentDesign>) -> Snapshot {
        Snapshot {
            iteration: self.iteration,
            dists: self
                .dists
                .iter()
                .map(|d| {
                    let (mean, sigma) = d.dist.mean_sigma();
                    DistSnapshot {
                        mean,
                        sigma,
                        repr: d.dist.tag(),
                    }
                })
                .collect(),
            weights: self.weights().to_vec(),
            k: design.map(|d| d.k().to_vec()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistSnapshot {
    pub mean: f64,
    pub sigma: f64,
    pub repr: ReprTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub dists: Vec<DistSnapshot>,
    pub weights: Vec<f64>,
    /// Exponents of the experiment that produced this state (empty at 0).
    pub k: Vec<usize>,
}

/// Recorded history of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub snapshots: Vec<Snapshot>,
    pub diverged_at: Option<usize>,
    pub divergence_reason: Option<String>,
    pub switch_iterations: Vec<Option<usize>>,
    pub degenerate_refits: usize,
    pub weight_solves: usize,
    pub sigma_crit: f64,
}

impl TrajectoryLog {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("log always holds the initial snapshot")
    }
}

/// Iterations `0, round(10^{i/per_decade}) ≤ budget`, and `budget` itself.
pub fn snapshot_grid(budget: usize, per_decade: usize) -> BTreeSet<usize> {
    let mut grid = BTreeSet::from([0, budget]);
    if per_decade == 0 {
        return grid;
    }
    let mut i = 0usize;
    loop {
        let it = 10f64.powf(i as f64 / per_decade as f64).round() as usize;
        if it > budget {
            break;
        }
        grid.insert(it);
        i += 1;
    }
    grid
}

/// Runs one trial: design, simulate, update, for `config.iterations` steps.
/// A breakdown freezes the state; the remaining grid points repeat it.
pub fn run(config: &EstimatorConfig, truth: &GroundTruth) -> Result<TrajectoryLog> {
    let mut state = EstimatorState::init(config)?;
    let mut scheme = SchemeState::new(config.scheme.clone())?;
    let mut rng = TrialRng::seed_from_u64(config.seed);
    let grid = snapshot_grid(config.iterations, config.snapshots_per_decade);
    let mut log = TrajectoryLog {
        snapshots: vec![state.snapshot(None)],
        diverged_at: None,
        divergence_reason: None,
        switch_iterations: vec![None; config.num_distributions],
        degenerate_refits: 0,
        weight_solves: 0,
        sigma_crit: state.sigma_crit(),
    };
    let mut last_design = None;
    for it in 1..=config.iterations {
        if log.diverged_at.is_none() {
            let design = scheme.next_design(&state.summary(), &mut rng);
            let m = simulate_experiment(&design, truth, config.noise, &mut rng);
            match state.step(&design, &m) {
                Ok(report) => log.degenerate_refits += report.degenerate_refits,
                Err(e) => {
                    log.diverged_at = Some(it);
                    log.divergence_reason = Some(e.to_string());
                }
            }
            last_design = Some(design);
        }
        if config.log_every_iteration || grid.contains(&it) {
            let mut snap = state.snapshot(last_design.as_ref());
            snap.iteration = it;
            log.snapshots.push(snap);
        }
    }
    log.switch_iterations = state.distributions().iter().map(|d| d.switch_iteration).collect();
    log.weight_solves = state.weight_state().solves();
    Ok(log)
}
