//! Survival of a product of two independent heavy-tailed variables by
//! quadrature, compared with the predicted tail class.
//!
//! ```bash
//! cargo run --release --example product_tails
//! ```

use stable_kolmogorov::stats::{fit_tail, SurvivalCurve, TailModel};
use stable_kolmogorov::theory::{tail_product_oracle, tail_product_predict, TailClass, TailSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid: Vec<f64> = (0..=60).map(|i| 10f64.powf(6.0 + 0.1 * i as f64)).collect();
    for (nu, mu) in [(0.5, 0.5), (0.5, 1.0), (0.3, 0.7)] {
        let vals = tail_product_oracle(&TailSpec::pareto(nu), &TailSpec::pareto(mu), &grid)?;
        let pred = tail_product_predict(TailClass::new(nu, 0), TailClass::new(mu, 0));
        let curve = SurvivalCurve {
            points: grid.iter().zip(&vals).map(|(&z, v)| (z, v.value)).collect(),
            n_total: 0,
            n_censored: 0,
            censor_level: None,
        };
        let joint = fit_tail(&curve, Some((1e6, 1e12)), TailModel::PowerLog)?;
        let pinned = fit_tail(&curve, Some((1e6, 1e12)), TailModel::LogPowerGivenExponent(pred.exponent))?;
        println!(
            "Pareto({nu}) x Pareto({mu}): predicted z^-{} (log z)^{}; fitted exponent {:.4}, log power {:.3}; P[XY > 1e9] = {:.6e}",
            pred.exponent,
            pred.logpow,
            joint.exponent_hat,
            pinned.logpow_hat.unwrap_or(f64::NAN),
            vals[30].value
        );
    }
    Ok(())
}
