//! Matching estimates to a known ground truth and filtering final estimates.

use std::f64::consts::{PI, TAU};

use crate::simulator::GroundTruth;
use crate::wrapped_normal::reduce_angle;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimate {
    pub phase: f64,
    pub weight: f64,
    /// Recent `(iteration, phase)` pairs, oldest first.
    pub history: Vec<(usize, f64)>,
}

impl PhaseEstimate {
    pub fn new(phase: f64, weight: f64) -> Self {
        Self {
            phase: reduce_angle(phase),
            weight: weight.max(0.0),
            history: Vec::new(),
        }
    }

    pub fn with_history(mut self, history: Vec<(usize, f64)>) -> Self {
        self.history = history;
        self
    }

    /// Sum of circular steps over the last `window` recorded phases.
    pub fn total_variation(&self, window: usize) -> f64 {
        let start = self.history.len().saturating_sub(window);
        self.history[start..]
            .windows(2)
            .map(|w| circular_distance(w[0].1, w[1].1))
            .sum()
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

/// Signed difference `a − b` wrapped into `[−π, π)`.
pub fn signed_difference(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

/// Weighted mean of angles in the tangent space at `center`:
/// `center + Σ wᵢ·wrap(φᵢ − center) / Σ wᵢ`. Falls back to `center` when the
/// total weight is zero.
pub fn weighted_circular_mean(center: f64, items: &[(f64, f64)]) -> f64 {
    let total: f64 = items.iter().map(|&(_, w)| w).sum();
    if !(total > 0.0) {
        return reduce_angle(center);
    }
    let shift: f64 = items.iter().map(|&(phi, w)| w * signed_difference(phi, center)).sum();
    reduce_angle(center + shift / total)
}

/// Index of the circularly nearest truth phase; ties go to the lower index.
pub fn nearest_truth(phase: f64, truth: &GroundTruth) -> usize {
    let mut best = 0;
    for (i, &t) in truth.phases().iter().enumerate() {
        if circular_distance(phase, t) < circular_distance(phase, truth.phases()[best]) {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollatedPhase {
    pub phase: f64,
    pub weight: f64,
    pub phase_error: f64,
    pub weight_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Truth index per estimate.
    pub assignment: Vec<usize>,
    /// One entry per truth phase.
    pub collated: Vec<CollatedPhase>,
}

impl Matching {
    pub fn mean_phase_error(&self) -> f64 {
        mean(self.collated.iter().map(|c| c.phase_error))
    }

    pub fn mean_weight_error(&self) -> f64 {
        mean(self.collated.iter().map(|c| c.weight_error))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

/// Assigns each estimate to its nearest truth phase and collates per phase.
pub fn match_to_truth(estimates: &[PhaseEstimate], truth: &GroundTruth) -> Matching {
    let assignment: Vec<usize> = estimates.iter().map(|e| nearest_truth(e.phase, truth)).collect();
    collate(estimates, truth, &assignment)
}

/// Collates estimates under a fixed assignment, e.g. one taken at a
/// reference iteration. A truth phase without any weight gets phase error π.
pub fn collate(estimates: &[PhaseEstimate], truth: &GroundTruth, assignment: &[usize]) -> Matching {
    assert_eq!(estimates.len(), assignment.len(), "one assignment per estimate");
    let collated = truth
        .phases()
        .iter()
        .zip(truth.weights())
        .enumerate()
        .map(|(t, (&phi, &w))| {
            let members: Vec<(f64, f64)> = estimates
                .iter()
                .zip(assignment)
                .filter(|&(_, &a)| a == t)
                .map(|(e, _)| (e.phase, e.weight))
                .collect();
            let weight: f64 = members.iter().map(|m| m.1).sum();
            let (phase, phase_error) = if weight > 0.0 {
                let p = weighted_circular_mean(phi, &members);
                (p, circular_distance(p, phi))
            } else {
                (f64::NAN, PI)
            };
            CollatedPhase {
                phase,
                weight,
                phase_error,
                weight_error: (weight - w).abs(),
            }
        })
        .collect();
    Matching {
        assignment: assignment.to_vec(),
        collated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    pub weight_threshold: f64,
    pub tv_window: usize,
    pub tv_threshold: f64,
    pub tau: f64,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            weight_threshold: 1e-3,
            tv_window: 50,
            tv_threshold: 0.5,
            tau: 5f64.to_radians(),
        }
    }
}

/// Weight threshold, then oscillation filter, then greedy bundling by
/// descending weight. Merged estimates keep the center's history.
pub fn filter_estimates(estimates: &[PhaseEstimate], opts: &FilterOptions) -> Vec<PhaseEstimate> {
    assert!(opts.tv_window >= 2, "tv_window must be at least 2");
    let mut kept: Vec<&PhaseEstimate> = estimates
        .iter()
        .filter(|e| e.weight >= opts.weight_threshold)
        .filter(|e| e.total_variation(opts.tv_window) <= opts.tv_threshold)
        .collect();
    // Stable sort keeps input order among equal weights.
    kept.sort_by(|a, b| b.weight.total_cmp(&a.weight));

    let mut taken = vec![false; kept.len()];
    let mut out = Vec::new();
    for c in 0..kept.len() {
        if taken[c] {
            continue;
        }
        let center = kept[c];
        let mut members = Vec::new();
        for (i, e) in kept.iter().enumerate() {
            if !taken[i] && circular_distance(e.phase, center.phase) <= opts.tau {
                taken[i] = true;
                members.push((e.phase, e.weight));
            }
        }
        let weight: f64 = members.iter().map(|m| m.1).sum();
        let phase = if members.len() == 1 {
            center.phase
        } else {
            weighted_circular_mean(center.phase, &members)
        };
        out.push(PhaseEstimate {
            phase,
            weight,
            history: center.history.clone(),
        });
    }
    out
}

/// True iff the estimates and truth phases pair up one-to-one with every
/// deviation at most `tol`.
pub fn success_check(filtered: &[PhaseEstimate], truth: &GroundTruth, tol: f64) -> bool {
    let n = truth.len();
    if filtered.len() != n {
        return false;
    }
    let adj: Vec<Vec<usize>> = filtered
        .iter()
        .map(|e| (0..n).filter(|&t| circular_distance(e.phase, truth.phases()[t]) <= tol).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    (0..filtered.len()).all(|e| {
        let mut seen = vec![false; n];
        augment(e, &adj, &mut owner, &mut seen)
    })
}

fn augment(e: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &t in &adj[e] {
        if seen[t] {
            continue;
        }
        seen[t] = true;
        if owner[t].map_or(true, |o| augment(o, adj, owner, seen)) {
            owner[t] = Some(e);
            return true;
        }
    }
    false
}
