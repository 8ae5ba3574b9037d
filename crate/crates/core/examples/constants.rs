//! Closed-form constants for a few laws.
//!
//! ```bash
//! cargo run --example constants
//! ```

use stable_kolmogorov::StableLaw;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>5} {:>5} | {:>8} {:>8} {:>8} {:>8} | {:>9} {:>9}", "alpha", "rho", "gamma", "gamma_b", "theta", "theta_b", "kappa", "velocity");
    for (alpha, rho) in [(2.0, 0.5), (1.5, 0.5), (1.5, 0.4), (1.2, 0.45), (1.0, 0.5), (0.7, 0.3), (0.8, 1.0)] {
        let law = StableLaw::new(alpha, rho)?;
        let (kappa, velocity) = match (law.kappa(), law.velocity()) {
            (Ok(k), Ok(v)) => (format!("{k:9.5}"), format!("{v:9.5}")),
            _ => ("monotone".to_string(), "-".to_string()),
        };
        println!(
            "{alpha:5.2} {rho:5.2} | {:8.5} {:8.5} {:8.5} {:8.5} | {kappa:>9} {velocity:>9}",
            law.gamma(),
            law.gamma_bar(),
            law.theta(),
            law.theta_bar()
        );
    }
    // Brownian case: the winding velocity is −√3/2
    let bm = StableLaw::new(2.0, 0.5)?;
    println!("\nBrownian velocity {:.12} vs -sqrt(3)/2 = {:.12}", bm.velocity()?, -(3f64.sqrt()) / 2.0);
    Ok(())
}
