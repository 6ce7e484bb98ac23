//! Conditional measurement probabilities `P(m⃗ | φ)` for multi-round phase
//! estimation circuits, pointwise and as exact Fourier series.
//!
//! Round `r` of a standard experiment contributes the factor
//! `cos²(k_r φ/2 + (β_r − m_r π)/2) = ½(1 + cos(k_r φ + β_r − m_r π))`.
//! In QFT mode the exponents are `2^{R−1}, …, 2, 1` and the phase shifts are
//! feedback rotations computed from the bits measured in earlier rounds.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;

/// Largest round count for read-out enumeration in standard mode.
pub const MAX_READOUT_ROUNDS: usize = 12;
/// Largest round count supported in QFT mode.
pub const MAX_QFT_ROUNDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircuitMode {
    Standard,
    /// Exponents fixed to descending powers of two, phase shifts from feedback.
    Qft,
}

/// Exponents and phase shifts of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDesign {
    k: Vec<usize>,
    beta: Vec<f64>,
    mode: CircuitMode,
}

impl ExperimentDesign {
    pub fn new(k: Vec<usize>, beta: Vec<f64>) -> Result<Self> {
        if k.is_empty() || k.len() != beta.len() {
            return Err(Error::InvalidInput(format!(
                "design needs matching non-empty k and beta (got {} and {})",
                k.len(),
                beta.len()
            )));
        }
        if k.iter().any(|&k| k == 0) {
            return Err(Error::InvalidInput("exponents must be positive".into()));
        }
        Ok(Self {
            k,
            beta,
            mode: CircuitMode::Standard,
        })
    }

    /// Single-round design.
    pub fn single(k: usize, beta: f64) -> Result<Self> {
        Self::new(vec![k], vec![beta])
    }

    /// QFT design with `rounds` rounds: `k = [2^{R−1}, …, 1]`, β unused.
    pub fn qft(rounds: usize) -> Result<Self> {
        check_qft_rounds(rounds)?;
        Ok(Self {
            k: qft_exponents(rounds),
            beta: vec![0.0; rounds],
            mode: CircuitMode::Qft,
        })
    }

    pub fn rounds(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn mode(&self) -> CircuitMode {
        self.mode
    }

    /// `Σ_r k_r`, the maximum frequency of the likelihood series.
    pub fn total_exponent(&self) -> usize {
        self.k.iter().sum()
    }
}

/// Observed bit vector of one experiment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementRecord {
    bits: Vec<u8>,
}

impl MeasurementRecord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("measurement bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    /// The `rounds`-bit record whose bit `r` is bit `r` of `index`.
    pub fn from_index(index: usize, rounds: usize) -> Self {
        Self {
            bits: (0..rounds).map(|r| ((index >> r) & 1) as u8).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn hamming_distance(&self, other: &MeasurementRecord) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }

    /// All `2^rounds` records.
    pub fn all(rounds: usize) -> impl Iterator<Item = MeasurementRecord> {
        (0..1usize << rounds).map(move |i| Self::from_index(i, rounds))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Ideal,
    /// With probability `1 − e^{−Σk/k_err}` the record is replaced by uniform bits.
    Depolarizing { k_err: f64 },
    /// Every bit is flipped independently with probability `p`.
    ReadOut { p: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Ideal => Ok(()),
            NoiseModel::Depolarizing { k_err } if k_err > 0.0 => Ok(()),
            NoiseModel::Depolarizing { k_err } => {
                Err(Error::InvalidInput(format!("k_err must be positive, got {k_err}")))
            }
            NoiseModel::ReadOut { p } if (0.0..=0.5).contains(&p) => Ok(()),
            NoiseModel::ReadOut { p } => {
                Err(Error::InvalidInput(format!("read-out error must lie in [0, 0.5], got {p}")))
            }
        }
    }

    /// Probability that a depolarizing channel leaves the record intact.
    pub fn survival_probability(&self, design: &ExperimentDesign) -> f64 {
        match *self {
            NoiseModel::Depolarizing { k_err } => depolarizing_survival(design.total_exponent(), k_err),
            _ => 1.0,
        }
    }

    pub fn readout_p(&self) -> f64 {
        match *self {
            NoiseModel::ReadOut { p } => p,
            _ => 0.0,
        }
    }
}

pub(crate) fn depolarizing_survival(total_exponent: usize, k_err: f64) -> f64 {
    (-(total_exponent as f64) / k_err).exp()
}

fn check_qft_rounds(rounds: usize) -> Result<()> {
    if !(1..=MAX_QFT_ROUNDS).contains(&rounds) {
        return Err(Error::InvalidInput(format!(
            "QFT rounds must lie in 1..={MAX_QFT_ROUNDS}, got {rounds}"
        )));
    }
    Ok(())
}

pub(crate) fn qft_exponents(rounds: usize) -> Vec<usize> {
    (0..rounds).rev().map(|e| 1usize << e).collect()
}

/// Feedback rotation applied before round `r` (0-based) given the true bits of
/// earlier rounds: `β_r = −2π Σ_{t<r} m_t 2^{−(r−t+1)}`.
pub fn qft_feedback_phase(round: usize, earlier_bits: &[u8]) -> f64 {
    -TAU * earlier_bits[..round]
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(t, _)| 0.5f64.powi((round - t + 1) as i32))
        .sum::<f64>()
}

fn round_factor(k: usize, beta: f64, bit: u8, phi: f64) -> f64 {
    let half = 0.5 * (k as f64 * phi + beta - bit as f64 * PI);
    let c = half.cos();
    c * c
}

/// Noise-free `P(m⃗ | φ)` for a standard-mode design.
pub fn prob_given_phase(design: &ExperimentDesign, m: &MeasurementRecord, phi: f64) -> f64 {
    debug_assert_eq!(design.rounds(), m.len());
    design
        .k
        .iter()
        .zip(&design.beta)
        .zip(m.bits())
        .map(|((&k, &beta), &bit)| round_factor(k, beta, bit, phi))
        .product()
}

/// Noise-free probability of the true QFT outcome path `m⃗` at phase `phi`.
pub fn qft_path_probability(m: &MeasurementRecord, phi: f64) -> f64 {
    let rounds = m.len();
    let ks = qft_exponents(rounds);
    (0..rounds)
        .map(|r| round_factor(ks[r], qft_feedback_phase(r, m.bits()), m.bits()[r], phi))
        .product()
}

/// `P(m | m′) = (1−p)^{R−d} p^d`.
pub fn readout_flip_probability(observed: &MeasurementRecord, truth: &MeasurementRecord, p: f64) -> f64 {
    let d = observed.hamming_distance(truth) as i32;
    let r = observed.len() as i32;
    (1.0 - p).powi(r - d) * p.powi(d)
}

/// Noise-transformed `P(m⃗ | φ)` evaluated pointwise, for either circuit mode.
pub fn noisy_prob_given_phase(
    design: &ExperimentDesign,
    m: &MeasurementRecord,
    noise: NoiseModel,
    phi: f64,
) -> f64 {
    let rounds = design.rounds();
    let path = |truth: &MeasurementRecord| match design.mode {
        CircuitMode::Standard => prob_given_phase(design, truth, phi),
        CircuitMode::Qft => qft_path_probability(truth, phi),
    };
    match noise {
        NoiseModel::Ideal => path(m),
        NoiseModel::Depolarizing { .. } => {
            let p = noise.survival_probability(design);
            p * path(m) + (1.0 - p) * 0.5f64.powi(rounds as i32)
        }
        NoiseModel::ReadOut { p } => MeasurementRecord::all(rounds)
            .map(|truth| readout_flip_probability(m, &truth, p) * path(&truth))
            .sum(),
    }
}

/// Noise-free likelihood of a standard-mode record as a Fourier series, built
/// by successive single-round multiplications from the constant 1.
pub fn ideal_series(design: &ExperimentDesign, m: &MeasurementRecord) -> FourierSeries {
    design
        .k
        .iter()
        .zip(&design.beta)
        .zip(m.bits())
        .fold(FourierSeries::constant(1.0), |acc, ((&k, &beta), &bit)| {
            acc.multiply_single_round(k, beta - bit as f64 * PI)
        })
}

/// Exact Fourier form of the noise-transformed likelihood of a standard-mode design.
pub fn to_fourier(design: &ExperimentDesign, m: &MeasurementRecord, noise: NoiseModel) -> Result<FourierSeries> {
    if design.rounds() != m.len() {
        return Err(Error::InvalidInput("record length differs from round count".into()));
    }
    noise.validate()?;
    match noise {
        NoiseModel::Ideal => Ok(ideal_series(design, m)),
        NoiseModel::Depolarizing { k_err } => Ok(apply_depolarizing(&ideal_series(design, m), design, k_err)),
        NoiseModel::ReadOut { p } => apply_readout(design, m, p),
    }
}

/// Mixes an ideal likelihood with the uniform outcome distribution:
/// `p·L + (1−p)·2^{−R}` with `p = e^{−Σk/k_err}`.
pub fn apply_depolarizing(series: &FourierSeries, design: &ExperimentDesign, k_err: f64) -> FourierSeries {
    let p = depolarizing_survival(design.total_exponent(), k_err);
    series
        .scale(p)
        .add_constant((1.0 - p) * 0.5f64.powi(design.rounds() as i32))
}

/// Read-out-error likelihood `Σ_{m′} P(m|m′)·L(m′)` for a standard-mode design.
pub fn apply_readout(design: &ExperimentDesign, m: &MeasurementRecord, p: f64) -> Result<FourierSeries> {
    let rounds = design.rounds();
    if rounds > MAX_READOUT_ROUNDS {
        return Err(Error::EnumerationTooLarge {
            rounds,
            max: MAX_READOUT_ROUNDS,
        });
    }
    Ok(mix_readout(rounds, m, p, design.total_exponent(), |truth| ideal_series(design, truth)))
}

fn mix_readout(
    rounds: usize,
    m: &MeasurementRecord,
    p: f64,
    max_index: usize,
    series_for: impl Fn(&MeasurementRecord) -> FourierSeries,
) -> FourierSeries {
    let mut out = FourierSeries::with_max_index(max_index);
    for truth in MeasurementRecord::all(rounds) {
        let weight = readout_flip_probability(m, &truth, p);
        if weight == 0.0 {
            continue;
        }
        out = out.add_scaled(1.0, &series_for(&truth), weight);
    }
    out
}

/// Noise-free likelihood of one true QFT outcome path as a Fourier series.
pub fn qft_path_series(m: &MeasurementRecord) -> FourierSeries {
    let ks = qft_exponents(m.len());
    (0..m.len()).fold(FourierSeries::constant(1.0), |acc, r| {
        let beta = qft_feedback_phase(r, m.bits());
        acc.multiply_single_round(ks[r], beta - m.bits()[r] as f64 * PI)
    })
}

/// Likelihood of an observed QFT record under read-out error `p`, summed over
/// all true outcome paths.
pub fn qft_likelihood(rounds: usize, m: &MeasurementRecord, p: f64) -> Result<FourierSeries> {
    check_qft_rounds(rounds)?;
    if m.len() != rounds {
        return Err(Error::InvalidInput("record length differs from round count".into()));
    }
    Ok(mix_readout(rounds, m, p, (1 << rounds) - 1, qft_path_series))
}

/// Likelihood series for any design and noise model; QFT designs route through
/// [`qft_likelihood`], with depolarizing noise applied on top when requested.
pub fn likelihood_series(design: &ExperimentDesign, m: &MeasurementRecord, noise: NoiseModel) -> Result<FourierSeries> {
    match design.mode {
        CircuitMode::Standard => to_fourier(design, m, noise),
        CircuitMode::Qft => {
            noise.validate()?;
            let base = qft_likelihood(design.rounds(), m, noise.readout_p())?;
            Ok(match noise {
                NoiseModel::Depolarizing { k_err } => apply_depolarizing(&base, design, k_err),
                _ => base,
            })
        }
    }
}
