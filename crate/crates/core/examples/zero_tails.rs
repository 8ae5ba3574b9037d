//! Tail of the n-th zero of `X`: predicted class and a fit on cascade samples.
//!
//! ```bash
//! cargo run --release --example zero_tails
//! ```

use stable_kolmogorov::cascade::{column_at, run_cascades, Live};
use stable_kolmogorov::path::DEFAULT_RETURN_CAP;
use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::stats::{fit_tail, survival_curve, TailModel};
use stable_kolmogorov::theory::theorem_b_prediction;
use stable_kolmogorov::{DtPolicy, Region, StableLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = StableLaw::new(2.0, 0.5)?;
    for n in 1..=4 {
        let c = theorem_b_prediction(&law, n, Region::PMinus)?;
        println!("n = {n}: P[T0 > t] ~ t^-{:.4} (log t)^{}", c.exponent, c.logpow);
    }

    // cascades started from (0, −1) with freshly simulated returns
    let live = Live { law, policy: DtPolicy::natural(0.02), cap: DEFAULT_RETURN_CAP };
    let runs = run_cascades(&law, &live, -1, 2, 4_000, &StreamFamily::new(5).domain("cascades"))?;
    for n in [1, 2] {
        let times: Vec<f64> = column_at(&runs, n, false).into_iter().map(f64::exp).collect();
        let fit = fit_tail(&survival_curve(&times, None)?, None, TailModel::Power)?;
        println!(
            "n = {n}: fitted exponent {:.3} +- {:.3} on [{:.2e}, {:.2e}]",
            fit.exponent_hat, fit.stderr, fit.window.0, fit.window.1
        );
    }
    Ok(())
}
