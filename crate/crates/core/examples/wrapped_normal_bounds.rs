//! Truncation error of the Fourier form of a wrapped normal and the critical
//! σ below which a fixed number of coefficients is no longer enough.

use bayes_qpe::wrapped_normal::{critical_sigma, truncation_error_bound, truncation_error_tail};
use bayes_qpe::WrappedNormal;

fn main() -> bayes_qpe::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "sigma", "n_max", "bound", "tail");
    for sigma in [0.5, 0.1, 0.05, 0.02] {
        let bound = truncation_error_bound(sigma, 200);
        let tail = truncation_error_tail(sigma, 200, 2000);
        println!("{sigma:>6} {:>12} {bound:>12.3e} {tail:>12.3e}", 200);
    }

    println!("\ncritical sigma at epsilon = 1e-4");
    for n_max in [50, 100, 200, 400, 800] {
        println!("  n_max {n_max:>4}: {:.6}", critical_sigma(n_max, 1e-4)?);
    }

    let narrow = WrappedNormal::new(1.0, 0.01)?;
    let series = narrow.to_fourier(200);
    let worst = (0..2000)
        .map(|i| i as f64 * std::f64::consts::TAU / 2000.0)
        .map(|phi| (series.evaluate(phi) - narrow.pdf(phi)).abs())
        .fold(0.0, f64::max);
    println!("\nsigma 0.01 with 200 coefficients, below the critical value: worst pointwise error {worst:.3e}");
    Ok(())
}
