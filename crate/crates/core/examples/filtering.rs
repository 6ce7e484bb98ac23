//! Post-processing: drop light or wandering estimates, merge neighbours and
//! check the result against the truth.

use bayes_qpe::harness::batch::final_estimates;
use bayes_qpe::engine::{run, EstimatorConfig};
use bayes_qpe::postprocess::{filter_estimates, match_to_truth, success_check, FilterOptions};
use bayes_qpe::simulator::GroundTruth;

fn main() -> bayes_qpe::Result<()> {
    let truth = GroundTruth::new(vec![2.0, 4.0, 5.0], vec![0.5, 0.3, 0.2])?;
    let cfg = EstimatorConfig {
        num_distributions: 6,
        iterations: 10_000,
        seed: 9,
        ..Default::default()
    };
    let log = run(&cfg, &truth)?;
    let raw = final_estimates(&log);
    println!("raw estimates");
    for e in &raw {
        println!("  phase {:.5} weight {:.4} tv {:.3}", e.phase, e.weight, e.total_variation(50));
    }
    let kept = filter_estimates(&raw, &FilterOptions::default());
    println!("filtered");
    for e in &kept {
        println!("  phase {:.5} weight {:.4}", e.phase, e.weight);
    }
    let matching = match_to_truth(&kept, &truth);
    println!(
        "collated phase error {:.2e}, weight error {:.2e}",
        matching.mean_phase_error(),
        matching.mean_weight_error()
    );
    println!("success within 0.01: {}", success_check(&kept, &truth, 0.01));
    Ok(())
}
