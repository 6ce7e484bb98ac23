//! Maximum-likelihood mixture weights on the unit simplex.
//!
//! Minimizes `f_n(x) = −(1/n) Σ_ℓ log⟨C^{(ℓ)}, x⟩` by gradient projection with
//! a backtracking Armijo line search, re-solving only on an exponentially
//! spaced grid of iterations.

use crate::error::{Error, Result};

/// Append-only record of per-experiment likelihood-mass vectors `C^{(ℓ)}`.
#[derive(Debug, Clone, Default)]
pub struct LikelihoodLedger {
    width: usize,
    data: Vec<f64>,
}

impl LikelihoodLedger {
    pub fn new(width: usize) -> Self {
        Self { width, data: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.data.len() / self.width
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, entry: &[f64]) -> Result<()> {
        if entry.len() != self.width {
            return Err(Error::InvalidInput(format!(
                "ledger entry has {} components, expected {}",
                entry.len(),
                self.width
            )));
        }
        if entry.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) || !entry.iter().any(|&c| c > 0.0) {
            return Err(Error::InvalidInput(format!("ledger entry {entry:?} is not a nonnegative nonzero vector")));
        }
        self.data.extend_from_slice(entry);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width.max(1))
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.width {
            return Err(Error::InvalidInput("point dimension differs from ledger width".into()));
        }
        if self.is_empty() {
            return Err(Error::InvalidInput("empty ledger".into()));
        }
        Ok(())
    }

    /// Objective value `f_n(x)`.
    pub fn nll(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let mut acc = 0.0;
        for (i, c) in self.entries().enumerate() {
            let dot = dot(c, x);
            if !(dot > 0.0) {
                return Err(Error::LogDomain { entry: i, value: dot });
            }
            acc += dot.ln();
        }
        Ok(-acc / self.len() as f64)
    }

    /// Gradient `−(1/n) Σ_ℓ C^{(ℓ)} / ⟨C^{(ℓ)}, x⟩`.
    pub fn nll_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(x).map(|(_, g)| g)
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(x)?;
        let mut value = 0.0;
        let mut grad = vec![0.0; self.width];
        for (i, c) in self.entries().enumerate() {
            let dot = dot(c, x);
            if !(dot > 0.0) {
                return Err(Error::LogDomain { entry: i, value: dot });
            }
            value += dot.ln();
            for (g, ci) in grad.iter_mut().zip(c) {
                *g += ci / dot;
            }
        }
        let scale = -1.0 / self.len() as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok((value * scale, grad))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean projection onto the unit simplex (sort-based, `O(m log m)`).
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    assert!(!x.is_empty(), "cannot project an empty vector");
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Line-search flavour of the gradient projection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearch {
    /// Project `x − α∇f` for every trial step `α`.
    Curvilinear,
    /// Project once with `α = 1` and backtrack along the resulting segment.
    SingleProjection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `‖d(1)‖₂` falls to this value.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_gamma: f64,
    pub line_search: LineSearch,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 100,
            max_halvings: 30,
            armijo_gamma: 0.001,
            line_search: LineSearch::Curvilinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Minimizes the ledger objective over the simplex starting from `x0`.
///
/// The returned point is feasible and its objective never exceeds `f(x0)`.
pub fn solve(ledger: &LikelihoodLedger, x0: &[f64], opts: &SolverOptions) -> Result<SolveReport> {
    let mut x = project_simplex(x0);
    let (mut f, mut grad) = ledger.value_and_gradient(&x)?;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let full = project_simplex(&axpy(&x, -1.0, &grad));
        let d1: Vec<f64> = full.iter().zip(&x).map(|(p, xi)| p - xi).collect();
        if norm(&d1) <= opts.tol {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let candidate = match opts.line_search {
                LineSearch::Curvilinear => project_simplex(&axpy(&x, -alpha, &grad)),
                LineSearch::SingleProjection => axpy(&x, alpha, &d1),
            };
            let step: Vec<f64> = candidate.iter().zip(&x).map(|(c, xi)| c - xi).collect();
            if let Ok(fc) = ledger.nll(&candidate) {
                if fc <= f + opts.armijo_gamma * dot(&step, &grad) {
                    accepted = Some((candidate, fc));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((next, fc)) = accepted else { break };
        iterations += 1;
        if fc > f {
            break;
        }
        x = next;
        let (fv, gv) = ledger.value_and_gradient(&x)?;
        f = fv;
        grad = gv;
        debug_assert!((fc - f).abs() <= 1e-12 * f.abs().max(1.0));
    }
    Ok(SolveReport {
        weights: x,
        objective: f,
        iterations,
    })
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

/// Whether the weights are re-solved at `iteration` (1-based): every
/// iteration up to `T`, then only at `T·2^a`.
pub fn should_solve(iteration: usize, schedule_t: usize) -> bool {
    if iteration <= schedule_t {
        return true;
    }
    if schedule_t == 0 || iteration % schedule_t != 0 {
        return false;
    }
    (iteration / schedule_t).is_power_of_two()
}

/// Current weight estimate together with its re-solve schedule.
#[derive(Debug, Clone)]
pub struct WeightState {
    weights: Vec<f64>,
    schedule_t: usize,
    last_solve_iteration: Option<usize>,
    solves: usize,
}

impl WeightState {
    /// Uniform weights over `m` distributions.
    pub fn uniform(m: usize, schedule_t: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
            schedule_t,
            last_solve_iteration: None,
            solves: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn schedule_t(&self) -> usize {
        self.schedule_t
    }

    pub fn last_solve_iteration(&self) -> Option<usize> {
        self.last_solve_iteration
    }

    /// Number of solves performed so far.
    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Re-solves from the current weights if the schedule says so.
    pub fn update(&mut self, ledger: &LikelihoodLedger, iteration: usize, opts: &SolverOptions) -> Result<bool> {
        if !should_solve(iteration, self.schedule_t) {
            return Ok(false);
        }
        let report = solve(ledger, &self.weights, opts)?;
        self.weights = report.weights;
        self.last_solve_iteration = Some(iteration);
        self.solves += 1;
        Ok(true)
    }
}
