//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use bayes_qpe::likelihood::{ExperimentDesign, MeasurementRecord, NoiseModel};
use bayes_qpe::weights::LikelihoodLedger;
use rand::Rng;

/// Periodic trapezoid rule on `[0, 2π)` with `n` nodes. Spectrally accurate
/// for smooth periodic integrands.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = TAU / n as f64;
    (0..n).map(|i| f(i as f64 * h)).sum::<f64>() * h
}

/// Composite Simpson rule, `n` even.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Wrapped normal density by direct summation over translates.
pub fn wrapped_normal_pdf(mu: f64, sigma: f64, phi: f64) -> f64 {
    let reach = ((12.0 * sigma) / TAU).ceil() as i64 + 1;
    (-reach..=reach)
        .map(|j| {
            let z = (phi - mu + j as f64 * TAU) / sigma;
            (-0.5 * z * z).exp()
        })
        .sum::<f64>()
        / (sigma * TAU.sqrt())
}

/// Projection onto the simplex by enumerating every support set.
pub fn brute_force_projection(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << m) {
        let support: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| x[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut y = vec![0.0; m];
        for &i in &support {
            y[i] = x[i] - shift;
        }
        if y.iter().any(|&v| v < 0.0) {
            continue;
        }
        let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, y));
        }
    }
    best.expect("some face always contains the projection").1
}

/// Negative mean log-likelihood, written out directly.
pub fn nll(entries: &[Vec<f64>], x: &[f64]) -> f64 {
    -entries
        .iter()
        .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().ln())
        .sum::<f64>()
        / entries.len() as f64
}

/// Minimizes [`nll`] over the simplex: coarse grid search, then pairwise
/// mass transfers refined by golden-section search until nothing improves.
pub fn grid_polish_minimum(entries: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let m = entries[0].len();
    let steps = 20usize;
    let mut best = vec![1.0 / m as f64; m];
    let mut best_f = nll(entries, &best);
    let mut point = vec![0usize; m];
    grid_walk(0, steps, &mut point, &mut |p| {
        let x: Vec<f64> = p.iter().map(|&v| v as f64 / steps as f64).collect();
        let f = nll(entries, &x);
        if f < best_f {
            best_f = f;
            best = x;
        }
    });
    for _ in 0..500 {
        let before = best_f;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                // move t from j to i, t ∈ [−x_i, x_j]
                let (lo, hi) = (-best[i], best[j]);
                let eval = |t: f64| {
                    let mut y = best.clone();
                    y[i] += t;
                    y[j] -= t;
                    nll(entries, &y)
                };
                let t = golden_section(eval, lo, hi);
                let f = eval(t);
                if f < best_f {
                    best[i] += t;
                    best[j] -= t;
                    best_f = f;
                }
            }
        }
        if before - best_f <= 1e-16 {
            break;
        }
    }
    (best, best_f)
}

fn grid_walk(i: usize, left: usize, point: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if i + 1 == point.len() {
        point[i] = left;
        visit(point);
        return;
    }
    for v in 0..=left {
        point[i] = v;
        grid_walk(i + 1, left - v, point, visit);
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // endpoints matter when the optimum sits on a face
    [a, b, mid].into_iter().min_by(|x, y| f(*x).total_cmp(&f(*y))).unwrap()
}

pub fn random_ledger<R: Rng>(rng: &mut R, m: usize, n: usize) -> (LikelihoodLedger, Vec<Vec<f64>>) {
    let mut ledger = LikelihoodLedger::new(m);
    let mut entries = Vec::new();
    for _ in 0..n {
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
        ledger.push(&c).unwrap();
        entries.push(c);
    }
    (ledger, entries)
}

pub fn random_design<R: Rng>(rng: &mut R, max_rounds: usize, max_k: usize) -> ExperimentDesign {
    let rounds = rng.gen_range(1..=max_rounds);
    let k = (0..rounds).map(|_| rng.gen_range(1..=max_k)).collect();
    let beta = (0..rounds).map(|_| rng.gen_range(0.0..TAU)).collect();
    ExperimentDesign::new(k, beta).unwrap()
}

pub fn random_record<R: Rng>(rng: &mut R, rounds: usize) -> MeasurementRecord {
    MeasurementRecord::new((0..rounds).map(|_| rng.gen_range(0..=1u8)).collect()).unwrap()
}

pub fn all_noise_models() -> Vec<NoiseModel> {
    vec![
        NoiseModel::Ideal,
        NoiseModel::Depolarizing { k_err: 7.5 },
        NoiseModel::ReadOut { p: 0.13 },
        NoiseModel::ReadOut { p: 0.5 },
    ]
}
