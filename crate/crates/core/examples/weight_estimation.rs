//! Maximum-likelihood mixture weights from a ledger of per-distribution
//! likelihoods, solved directly and on the doubling schedule.

use bayes_qpe::weights::{solve, LikelihoodLedger, SolverOptions, WeightState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// P(outcome | component), one row per component
const TABLE: [[f64; 4]; 3] = [[0.7, 0.1, 0.1, 0.1], [0.1, 0.6, 0.2, 0.1], [0.05, 0.15, 0.2, 0.6]];

fn main() -> bayes_qpe::Result<()> {
    let truth = [0.6, 0.3, 0.1];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ledger = LikelihoodLedger::new(3);
    let mut state = WeightState::uniform(3, 32);
    let opts = SolverOptions::default();
    for it in 1..=8192 {
        let u: f64 = rng.gen();
        let source = if u < truth[0] { 0 } else if u < truth[0] + truth[1] { 1 } else { 2 };
        let mut v: f64 = rng.gen();
        let outcome = TABLE[source].iter().position(|&p| {
            v -= p;
            v < 0.0
        });
        let outcome = outcome.unwrap_or(3);
        let c: Vec<f64> = TABLE.iter().map(|row| row[outcome]).collect();
        ledger.push(&c)?;
        if state.update(&ledger, it, &opts)? && it.is_power_of_two() {
            println!("iteration {it:>5}: weights {:.4?}", state.weights());
        }
    }
    let direct = solve(&ledger, &[1.0 / 3.0; 3], &opts)?;
    println!("direct solve: {:.4?}, objective {:.6}, {} steps", direct.weights, direct.objective, direct.iterations);
    println!("sampling weights {truth:?}");
    Ok(())
}
