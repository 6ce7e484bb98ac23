//! Outcome probabilities of one multi-round experiment under each noise
//! model, both pointwise and through the Fourier form.

use bayes_qpe::likelihood::{likelihood_series, noisy_prob_given_phase, ExperimentDesign, MeasurementRecord, NoiseModel};

fn main() -> bayes_qpe::Result<()> {
    let design = ExperimentDesign::new(vec![1, 2, 5], vec![0.3, 1.1, 2.0])?;
    let phi = 2.0;
    let noises = [
        NoiseModel::Ideal,
        NoiseModel::Depolarizing { k_err: 10.0 },
        NoiseModel::ReadOut { p: 0.1 },
    ];
    for noise in noises {
        println!("{noise:?}");
        let mut total = 0.0;
        for m in MeasurementRecord::all(design.rounds()) {
            let p = noisy_prob_given_phase(&design, &m, noise, phi);
            let series = likelihood_series(&design, &m, noise)?;
            total += p;
            println!("  m = {:?}: {p:.6} (series {:.6})", m.bits(), series.evaluate(phi));
        }
        println!("  total {total:.12}");
    }
    Ok(())
}
