//! Full multi-phase estimation run: Fourier densities that switch to wrapped
//! normals once narrow enough, with weights re-solved on a schedule.

use bayes_qpe::engine::{run, EstimatorConfig};
use bayes_qpe::simulator::GroundTruth;

fn main() -> bayes_qpe::Result<()> {
    let cfg = EstimatorConfig {
        num_distributions: 3,
        iterations: 20_000,
        seed: 3,
        ..Default::default()
    };
    let truth = GroundTruth::new(vec![2.0, 4.0, 5.0], vec![0.5, 0.3, 0.2])?;
    let log = run(&cfg, &truth)?;
    println!("critical sigma {:.5}", log.sigma_crit);
    for snap in log.snapshots.iter().filter(|s| [0, 100, 1000, 10_000, 20_000].contains(&s.iteration)) {
        println!("iteration {}", snap.iteration);
        for (d, w) in snap.dists.iter().zip(&snap.weights) {
            println!("  {:<7} mean {:.5} sigma {:.2e} weight {w:.4}", d.repr.as_str(), d.mean, d.sigma);
        }
    }
    println!("switch iterations {:?}", log.switch_iterations);
    println!("weight solves {}, diverged {:?}", log.weight_solves, log.diverged_at);
    Ok(())
}
