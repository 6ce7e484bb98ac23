//! Truncated Fourier series on the circle `[0, 2π)`.
//!
//! A series stores dense cosine and sine coefficient arrays indexed `0..=n` and
//! represents
//!
//! ```text
//! g(φ) = c₀ + Σ_{k=1..n} c_k cos(kφ) + s_k sin(kφ)
//! ```
//!
//! Products are formed exactly with the product-to-sum identities, so the
//! maximum index of a product is the sum of the maximum indices of its
//! factors. Truncation is an explicit, separate step.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Dense truncated trigonometric expansion. `sin[0]` is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Default for FourierSeries {
    fn default() -> Self {
        Self::zero()
    }
}

impl FourierSeries {
    /// The identically-zero series (`n = 0`).
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            cos: vec![value],
            sin: vec![0.0],
        }
    }

    /// The uniform density `1/2π`.
    pub fn uniform_prior() -> Self {
        Self::constant(1.0 / TAU)
    }

    /// Builds a series from coefficient arrays. The shorter array is padded with
    /// zeros and `sin[0]` is forced to zero.
    pub fn from_coeffs(mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        let len = cos.len().max(sin.len()).max(1);
        cos.resize(len, 0.0);
        sin.resize(len, 0.0);
        sin[0] = 0.0;
        Self { cos, sin }
    }

    /// Zero series with room for indices `0..=n`.
    pub fn with_max_index(n: usize) -> Self {
        Self {
            cos: vec![0.0; n + 1],
            sin: vec![0.0; n + 1],
        }
    }

    /// Maximum frequency index `n`.
    pub fn max_index(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Cosine coefficient `c_k`, zero beyond the stored range.
    pub fn cos_coeff(&self, k: usize) -> f64 {
        self.cos.get(k).copied().unwrap_or(0.0)
    }

    /// Sine coefficient `s_k`, zero beyond the stored range.
    pub fn sin_coeff(&self, k: usize) -> f64 {
        self.sin.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_cos(&mut self, k: usize, value: f64) {
        self.ensure_index(k);
        self.cos[k] = value;
    }

    pub fn set_sin(&mut self, k: usize, value: f64) {
        assert!(k > 0, "sin coefficient 0 is fixed to zero");
        self.ensure_index(k);
        self.sin[k] = value;
    }

    fn ensure_index(&mut self, k: usize) {
        if k >= self.cos.len() {
            self.cos.resize(k + 1, 0.0);
            self.sin.resize(k + 1, 0.0);
        }
    }

    /// Evaluates the trigonometric sum at `phi`.
    pub fn evaluate(&self, phi: f64) -> f64 {
        let mut acc = self.cos[0];
        for k in 1..self.cos.len() {
            let (c, s) = (self.cos[k], self.sin[k]);
            if c == 0.0 && s == 0.0 {
                continue;
            }
            let (sin_k, cos_k) = (k as f64 * phi).sin_cos();
            acc += c * cos_k + s * sin_k;
        }
        acc
    }

    /// `∫₀^{2π} g(φ) dφ = 2π·c₀`.
    pub fn integral(&self) -> f64 {
        TAU * self.cos[0]
    }

    /// Exact product via the product-to-sum identities. The result has maximum
    /// index `self.n + other.n`; zero terms of either factor are skipped.
    pub fn multiply(&self, other: &FourierSeries) -> FourierSeries {
        let mut out = FourierSeries::with_max_index(self.max_index() + other.max_index());
        let rhs: Vec<(usize, f64, f64)> = other.nonzero_terms().collect();
        for (j, ac, as_) in self.nonzero_terms() {
            for &(k, bc, bs) in &rhs {
                // cos·cos = ½cos(j−k) + ½cos(j+k)
                // sin·sin = ½cos(j−k) − ½cos(j+k)
                // sin·cos = ½sin(j+k) + ½sin(j−k)
                // cos·sin = ½sin(j+k) − ½sin(j−k)
                let sum = j + k;
                out.cos[sum] += 0.5 * (ac * bc - as_ * bs);
                out.sin[sum] += 0.5 * (as_ * bc + ac * bs);
                let diff_cos = 0.5 * (ac * bc + as_ * bs);
                let diff_sin = 0.5 * (as_ * bc - ac * bs);
                out.add_term_signed(j as isize - k as isize, diff_cos, diff_sin);
            }
        }
        out.sin[0] = 0.0;
        out
    }

    /// Multiplies by the single-round likelihood `½(1 + cos(kφ + γ))` using the
    /// closed-form coefficient shifts, in `O(n)`.
    pub fn multiply_single_round(&self, k: usize, gamma: f64) -> FourierSeries {
        assert!(k >= 1, "exponent k must be positive");
        let mut out = FourierSeries::with_max_index(self.max_index() + k);
        let (sin_g, cos_g) = gamma.sin_cos();
        let (qc, qs) = (0.25 * cos_g, 0.25 * sin_g);
        for (j, c, s) in self.nonzero_terms() {
            out.cos[j] += 0.5 * c;
            out.sin[j] += 0.5 * s;
            // ½(1+cos(kφ+γ))·c·cos(jφ)
            out.cos[k + j] += qc * c;
            out.sin[k + j] -= qs * c;
            out.add_term_signed(k as isize - j as isize, qc * c, -qs * c);
            // ½(1+cos(kφ+γ))·s·sin(jφ)
            out.sin[k + j] += qc * s;
            out.cos[k + j] += qs * s;
            out.add_term_signed(k as isize - j as isize, -qs * s, -qc * s);
        }
        out.sin[0] = 0.0;
        out
    }

    /// Entrywise `alpha·self + beta·other`.
    pub fn add_scaled(&self, alpha: f64, other: &FourierSeries, beta: f64) -> FourierSeries {
        let n = self.max_index().max(other.max_index());
        let mut out = FourierSeries::with_max_index(n);
        for k in 0..=n {
            out.cos[k] = alpha * self.cos_coeff(k) + beta * other.cos_coeff(k);
            out.sin[k] = alpha * self.sin_coeff(k) + beta * other.sin_coeff(k);
        }
        out
    }

    pub fn scale(&self, factor: f64) -> FourierSeries {
        FourierSeries {
            cos: self.cos.iter().map(|c| c * factor).collect(),
            sin: self.sin.iter().map(|s| s * factor).collect(),
        }
    }

    pub fn add_constant(&self, value: f64) -> FourierSeries {
        let mut out = self.clone();
        out.cos[0] += value;
        out
    }

    /// Drops every coefficient above `n_max`.
    pub fn truncate(&self, n_max: usize) -> FourierSeries {
        if self.max_index() <= n_max {
            return self.clone();
        }
        FourierSeries {
            cos: self.cos[..=n_max].to_vec(),
            sin: self.sin[..=n_max].to_vec(),
        }
    }

    /// `∫₀^{2π} a(φ)·b(φ) dφ` by orthogonality.
    pub fn inner_product(&self, other: &FourierSeries) -> f64 {
        let n = self.max_index().min(other.max_index());
        let higher: f64 = (1..=n)
            .map(|k| self.cos[k] * other.cos[k] + self.sin[k] * other.sin[k])
            .sum();
        TAU * self.cos[0] * other.cos[0] + PI * higher
    }

    /// Circular mean in `[0, 2π)` and Holevo variance of a normalized density,
    /// read off the first harmonic.
    pub fn moments(&self) -> Result<(f64, f64)> {
        let (c1, s1) = (self.cos_coeff(1), self.sin_coeff(1));
        let r2 = c1 * c1 + s1 * s1;
        if r2 <= 0.0 || !r2.is_finite() {
            return Err(Error::UndefinedMoments);
        }
        let mut mean = s1.atan2(c1);
        if mean < 0.0 {
            mean += TAU;
        }
        // atan2 can return exactly -0.0 + 2π rounding up to 2π
        if mean >= TAU {
            mean -= TAU;
        }
        Ok((mean, 1.0 / (PI * PI * r2) - 1.0))
    }

    /// Rescales so that the series integrates to one.
    pub fn normalize(&self) -> Result<FourierSeries> {
        let c0 = self.cos[0];
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::NonNormalizable { c0 });
        }
        let mut out = self.scale(1.0 / (TAU * c0));
        out.cos[0] = 1.0 / TAU;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|v| v.is_finite())
    }

    fn nonzero_terms(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .filter(|(_, (c, s))| **c != 0.0 || **s != 0.0)
            .map(|(k, (c, s))| (k, *c, *s))
    }

    /// Adds `c·cos(iφ) + s·sin(iφ)` for a possibly negative index `i`.
    fn add_term_signed(&mut self, index: isize, c: f64, s: f64) {
        let k = index.unsigned_abs();
        self.cos[k] += c;
        if index > 0 {
            self.sin[k] += s;
        } else if index < 0 {
            self.sin[k] -= s;
        }
    }
}
