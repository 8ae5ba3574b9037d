//! Draw unit-time stable variables and compare the empirical characteristic
//! function with `exp(Ψ(λ))`.
//!
//! ```bash
//! cargo run --release --example sampler -- 1.5 0.4
//! ```

use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::stats::ecf_check;
use stable_kolmogorov::StableLaw;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (alpha, rho) = match args[..] {
        [a, r] => (a, r),
        _ => (1.5, 0.4),
    };
    let law = StableLaw::new(alpha, rho)?;
    let sampler = law.sampler();
    let mut rng = StreamFamily::new(1).domain("example").stream(0);
    let draws: Vec<f64> = (0..100_000).map(|_| sampler.sample_unit(&mut rng)).collect();

    let positive = draws.iter().filter(|&&z| z >= 0.0).count() as f64 / draws.len() as f64;
    println!("alpha = {alpha}, rho = {rho}");
    println!("P[L1 >= 0] = {positive:.4} (target {rho})");
    let report = ecf_check(&draws, &law, &[-2.0, -0.5, 0.5, 1.0, 2.0]);
    for row in &report.rows {
        println!(
            "lambda {:5.2}: ecf = ({:+.4}, {:+.4})  exp(Psi) = ({:+.4}, {:+.4})  z = {:.2}",
            row.lambda, row.empirical.0, row.empirical.1, row.target.0, row.target.1, row.z
        );
    }
    Ok(())
}
