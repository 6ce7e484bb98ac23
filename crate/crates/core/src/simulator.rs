//! Ground-truth measurement sampling and the k-selection schemes that produce
//! successive experiment designs.
//!
//! Every trial owns one [`TrialRng`] stream (ChaCha8, a counter-based stream
//! cipher generator whose output is identical across platforms), derived from
//! a master seed with [`trial_seed`].

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::likelihood::{qft_feedback_phase, CircuitMode, ExperimentDesign, MeasurementRecord, NoiseModel};

pub type TrialRng = ChaCha8Rng;

/// Per-trial seed: SplitMix64 finalizer applied to
/// `master + 0x9E3779B97F4A7C15·(trial + 1)` (wrapping arithmetic).
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trial.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for `trial` under `master`.
pub fn trial_rng(master: u64, trial: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial))
}

/// Eigenphases present in the initial state and their weights `|α_j|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    phases: Vec<f64>,
    weights: Vec<f64>,
}

impl GroundTruth {
    pub fn new(phases: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if phases.is_empty() || phases.len() != weights.len() {
            return Err(Error::InvalidInput("truth needs matching non-empty phases and weights".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("truth weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("truth weights sum to {total}, not 1")));
        }
        Ok(Self {
            phases: phases.into_iter().map(|p| p.rem_euclid(TAU)).collect(),
            weights,
        })
    }

    /// Normalizes `weights` before construction.
    pub fn normalized(phases: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidInput("truth weights are not normalizable".into()));
        }
        let mut weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // push rounding residue into the largest weight
        let residue = 1.0 - weights.iter().sum::<f64>();
        if let Some(w) = weights.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *w += residue;
        }
        Self::new(phases, weights)
    }

    pub fn single(phase: f64) -> Self {
        Self {
            phases: vec![phase.rem_euclid(TAU)],
            weights: vec![1.0],
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return j;
            }
        }
        // u landed in the rounding gap above the cumulative sum
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

fn bit_with_prob_zero<R: Rng + ?Sized>(p_zero: f64, rng: &mut R) -> u8 {
    u8::from(rng.gen::<f64>() >= p_zero)
}

fn round_prob_zero(k: usize, beta: f64, phi: f64) -> f64 {
    let c = (0.5 * (k as f64 * phi + beta)).cos();
    c * c
}

/// Samples one measurement record. A fresh eigenstate index is drawn per
/// experiment; rounds are conditionally independent given that eigenphase
/// (QFT rounds see feedback from the true earlier bits); noise is applied last.
pub fn simulate_experiment<R: Rng + ?Sized>(
    design: &ExperimentDesign,
    truth: &GroundTruth,
    noise: NoiseModel,
    rng: &mut R,
) -> MeasurementRecord {
    let phi = truth.phases[truth.sample_index(rng)];
    let rounds = design.rounds();
    let mut bits = Vec::with_capacity(rounds);
    match design.mode() {
        CircuitMode::Standard => {
            for (&k, &beta) in design.k().iter().zip(design.beta()) {
                bits.push(bit_with_prob_zero(round_prob_zero(k, beta, phi), rng));
            }
        }
        CircuitMode::Qft => {
            for r in 0..rounds {
                let beta = qft_feedback_phase(r, &bits);
                bits.push(bit_with_prob_zero(round_prob_zero(design.k()[r], beta, phi), rng));
            }
        }
    }
    match noise {
        NoiseModel::Ideal => {}
        NoiseModel::Depolarizing { .. } => {
            let survive = noise.survival_probability(design);
            if rng.gen::<f64>() >= survive {
                for b in bits.iter_mut() {
                    *b = u8::from(rng.gen::<bool>());
                }
            }
        }
        NoiseModel::ReadOut { p } => {
            for b in bits.iter_mut() {
                if rng.gen::<f64>() < p {
                    *b ^= 1;
                }
            }
        }
    }
    MeasurementRecord::new(bits).expect("sampled bits are binary")
}

/// How the exponents of successive experiments are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    /// The same multi-round exponent vector every experiment.
    Fixed { k: Vec<usize> },
    /// Single round, `k` cycling through `1..=c_max`.
    Cyclic { c_max: usize },
    /// Single round with `k = k̄`.
    Adaptive { k_max: usize },
    /// Cyclic with `c_max = k̄`, refreshed at each cycle boundary.
    AdaptiveCyclic { k_max: usize },
    /// Powers-of-two exponents with feedback phases.
    Qft { rounds: usize },
}

impl SchemeKind {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        match self {
            SchemeKind::Fixed { k } if k.is_empty() || k.contains(&0) => bad("fixed scheme needs positive exponents"),
            SchemeKind::Cyclic { c_max: 0 } => bad("c_max must be positive"),
            SchemeKind::Adaptive { k_max: 0 } | SchemeKind::AdaptiveCyclic { k_max: 0 } => bad("k_max must be positive"),
            SchemeKind::Qft { rounds } if !(1..=crate::likelihood::MAX_QFT_ROUNDS).contains(rounds) => {
                bad("QFT rounds out of range")
            }
            _ => Ok(()),
        }
    }
}

/// `k̄ = min(⌈Σ_j 1.25·w_j/σ_j⌉, k_max)`, at least 1. Entries with zero weight
/// or non-positive σ contribute nothing.
pub fn adaptive_k(summary: &[(f64, f64)], k_max: usize) -> usize {
    let total: f64 = summary
        .iter()
        .filter(|(w, s)| *w > 0.0 && *s > 0.0)
        .map(|(w, s)| 1.25 * w / s)
        .sum();
    if !total.is_finite() || total >= k_max as f64 {
        return k_max.max(1);
    }
    (total.ceil() as usize).clamp(1, k_max.max(1))
}

/// Design generator with its cycle position.
#[derive(Debug, Clone)]
pub struct SchemeState {
    kind: SchemeKind,
    position: usize,
    cycle_max: usize,
}

impl SchemeState {
    pub fn new(kind: SchemeKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            position: 0,
            cycle_max: 1,
        })
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    /// Current `c_max` of an adaptive-cyclic scheme.
    pub fn cycle_max(&self) -> usize {
        self.cycle_max
    }

    /// Produces the next design. `summary` lists `(weight, σ)` per tracked
    /// distribution and is read only by the adaptive kinds.
    pub fn next_design<R: Rng + ?Sized>(&mut self, summary: &[(f64, f64)], rng: &mut R) -> ExperimentDesign {
        let k = match &self.kind {
            SchemeKind::Qft { rounds } => {
                return ExperimentDesign::qft(*rounds).expect("validated round count");
            }
            SchemeKind::Fixed { k } => k.clone(),
            SchemeKind::Cyclic { c_max } => {
                let k = self.position % c_max + 1;
                self.position = (self.position + 1) % c_max;
                vec![k]
            }
            SchemeKind::Adaptive { k_max } => vec![adaptive_k(summary, *k_max)],
            SchemeKind::AdaptiveCyclic { k_max } => {
                if self.position == 0 {
                    self.cycle_max = adaptive_k(summary, *k_max);
                }
                let k = self.position + 1;
                self.position = if k >= self.cycle_max { 0 } else { self.position + 1 };
                vec![k]
            }
        };
        let beta = (0..k.len()).map(|_| rng.gen_range(0.0..TAU)).collect();
        ExperimentDesign::new(k, beta).expect("scheme exponents are positive")
    }
}
