//! QFT-style experiments: powers-of-two exponents with feedback phases,
//! estimated under read-out error.

use bayes_qpe::engine::{run, EstimatorConfig};
use bayes_qpe::likelihood::{qft_likelihood, MeasurementRecord, NoiseModel};
use bayes_qpe::simulator::{GroundTruth, SchemeKind};

fn main() -> bayes_qpe::Result<()> {
    let rounds = 4;
    let phi = 2.0;
    println!("outcome distribution at phi = {phi} with p = 0.05");
    for m in MeasurementRecord::all(rounds) {
        let p = qft_likelihood(rounds, &m, 0.05)?.evaluate(phi);
        if p > 0.02 {
            println!("  {:?}: {p:.4}", m.bits());
        }
    }

    let cfg = EstimatorConfig {
        scheme: SchemeKind::Qft { rounds },
        noise: NoiseModel::ReadOut { p: 0.05 },
        iterations: 2_000,
        seed: 5,
        ..Default::default()
    };
    let log = run(&cfg, &GroundTruth::single(phi))?;
    let d = &log.last().dists[0];
    println!("estimate {:.5} (sigma {:.2e}) for truth {phi}", d.mean, d.sigma);
    Ok(())
}
