//! Winding velocity from the multiplicative cascade over return pools.
//!
//! ```bash
//! cargo run --release --example winding_velocity -- 1.5 0.5
//! ```

use stable_kolmogorov::cascade::{estimate_kappa, run_cascades, Pools, ReturnPool};
use stable_kolmogorov::path::DEFAULT_RETURN_CAP;
use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::{DtPolicy, StableLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (alpha, rho) = match args[..] {
        [a, r] => (a, r),
        _ => (2.0, 0.5),
    };
    let law = StableLaw::new(alpha, rho)?;
    let seed = StreamFamily::new(7);
    let policy = DtPolicy::natural(0.01);
    let minus = ReturnPool::simulate(&law, -1, 4_000, &policy, DEFAULT_RETURN_CAP, &seed.domain("returns-minus"))?;
    let plus = ReturnPool::simulate(&law, 1, 4_000, &policy, DEFAULT_RETURN_CAP, &seed.domain("returns-plus"))?;

    let cascades = run_cascades(&law, &Pools::new(&minus, &plus)?, -1, 100, 300, &seed.domain("cascades"))?;
    let est = estimate_kappa(&cascades)?;
    println!("alpha = {alpha}, rho = {rho}");
    println!("kappa    {:.4} +- {:.4}   closed form {:.4}", est.kappa_hat, est.stderr, law.kappa()?);
    println!("velocity {:.4} +- {:.4}   closed form {:.4}", est.velocity_hat, est.velocity_stderr, law.velocity()?);
    Ok(())
}
