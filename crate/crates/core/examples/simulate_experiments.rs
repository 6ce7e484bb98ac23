//! Sampling outcomes from a mixture of eigenphases under each experiment
//! scheme, with per-trial seeds that do not depend on thread scheduling.

use bayes_qpe::likelihood::NoiseModel;
use bayes_qpe::simulator::{simulate_experiment, trial_rng, GroundTruth, SchemeKind, SchemeState};

fn main() -> bayes_qpe::Result<()> {
    let truth = GroundTruth::new(vec![2.0, 4.0, 5.0], vec![0.5, 0.3, 0.2])?;
    let schemes = [
        SchemeKind::Fixed { k: vec![1, 2, 5] },
        SchemeKind::Cyclic { c_max: 6 },
        SchemeKind::Adaptive { k_max: 64 },
        SchemeKind::Qft { rounds: 4 },
    ];
    // weight, σ pairs an estimator would report
    let summary = [(0.5, 0.05), (0.3, 0.1), (0.2, 0.2)];
    for kind in schemes {
        let mut scheme = SchemeState::new(kind.clone())?;
        let mut rng = trial_rng(7, 0);
        println!("{kind:?}");
        for _ in 0..4 {
            let design = scheme.next_design(&summary, &mut rng);
            let m = simulate_experiment(&design, &truth, NoiseModel::ReadOut { p: 0.05 }, &mut rng);
            println!("  k {:?} beta {:?} -> {:?}", design.k(), design.beta().iter().map(|b| format!("{b:.3}")).collect::<Vec<_>>(), m.bits());
        }
    }
    Ok(())
}
