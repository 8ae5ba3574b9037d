//! Pool of first returns from `(0, −1)` checked against the Mellin transform
//! of the return speed.
//!
//! ```bash
//! cargo run --release --example return_pool
//! ```

use stable_kolmogorov::cascade::ReturnPool;
use stable_kolmogorov::path::DEFAULT_RETURN_CAP;
use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::stats::{mc_log_moment, mc_mellin};
use stable_kolmogorov::theory::{log_moment_ell, mellin_ell, mellin_strip};
use stable_kolmogorov::{DtPolicy, StableLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = StableLaw::new(2.0, 0.5)?;
    let family = StreamFamily::new(3).domain("returns-minus");
    let pool = ReturnPool::simulate(&law, -1, 5_000, &DtPolicy::natural(0.01), DEFAULT_RETURN_CAP, &family)?;
    println!("{} returns, {} censored", pool.len(), pool.censored_count);

    let ells = pool.ells();
    let (m, se) = mc_log_moment(&ells)?;
    println!("E log l = {m:.4} +- {se:.4}   (pi cot(pi gamma) = {:.4})", log_moment_ell(&law, -1)?);
    println!("Mellin strip |s| < {:.3}", mellin_strip(&law, -1));
    for s in [0.25, 0.5, 0.75, 1.25] {
        let mc = mc_mellin(&ells, s)?;
        let exact = mellin_ell(&law, -1, s)?;
        println!(
            "s = {s:4.2}: MC {:.4} +- {:.4}  closed form {:.4}{}",
            mc.estimate.value,
            mc.jackknife_se,
            exact.value,
            if mc.nonfinite_variance { "  (heavy tail: variance looks infinite)" } else { "" }
        );
    }
    Ok(())
}
