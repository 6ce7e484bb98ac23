//! Fourier-series densities: build a prior, multiply by a single-round
//! likelihood, and read off the circular moments.

use bayes_qpe::{FourierSeries, WrappedNormal};

fn main() -> bayes_qpe::Result<()> {
    let prior = WrappedNormal::new(2.0, 0.8)?.to_fourier(64);
    println!("prior integral {:.12}", prior.integral());

    // P(m=0 | φ) for k = 3, β = 0.4 written as a series by hand
    let mut lik = FourierSeries::with_max_index(3);
    lik.set_cos(0, 0.5);
    lik.set_cos(3, 0.5 * 0.4f64.cos());
    lik.set_sin(3, -0.5 * 0.4f64.sin());

    let general = prior.multiply(&lik).normalize()?;
    let fast = prior.multiply_single_round(3, 0.4).normalize()?;
    let gap = (0..=general.max_index())
        .map(|k| (general.cos_coeff(k) - fast.cos_coeff(k)).abs().max((general.sin_coeff(k) - fast.sin_coeff(k)).abs()))
        .fold(0.0, f64::max);
    println!("general product vs single-round update: max coefficient gap {gap:.2e}");

    let (mean, var) = general.moments()?;
    println!("posterior mean {mean:.6}, Holevo variance {var:.6}");
    for phi in [0.0, 1.0, 2.0, 3.0, 4.0] {
        println!("  p({phi:.1}) = {:.6}", general.evaluate(phi));
    }
    Ok(())
}
