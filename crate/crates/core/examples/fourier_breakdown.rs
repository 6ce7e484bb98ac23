//! Why the mixed representation exists: with a fixed coefficient budget a
//! pure Fourier run eventually fails, while the mixed run keeps going.

use bayes_qpe::engine::{run, EstimatorConfig, RepresentationMode};
use bayes_qpe::simulator::GroundTruth;

fn main() -> bayes_qpe::Result<()> {
    let truth = GroundTruth::single(2.0);
    for mode in [RepresentationMode::FourierOnly, RepresentationMode::Mixed] {
        let cfg = EstimatorConfig {
            mode,
            n_max: 50,
            iterations: 5_000,
            seed: 11,
            ..Default::default()
        };
        let log = run(&cfg, &truth)?;
        let last = &log.last().dists[0];
        println!(
            "{mode:?}: diverged at {:?} ({}), final mean {:.5}, sigma {:.2e}",
            log.diverged_at,
            log.divergence_reason.as_deref().unwrap_or("none"),
            last.mean,
            last.sigma
        );
    }
    Ok(())
}
