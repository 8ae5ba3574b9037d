//! Adaptive Gauss–Kronrod quadrature on a damped oscillatory integrand.
//!
//! ```bash
//! cargo run --example quadrature
//! ```

use stable_kolmogorov::quad::{integrate, QuadOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 500 };
    // ∫₀^∞ e^{−x} sin(10x) dx = 10/101, truncated where e^{−x} < 1e-16
    let r = integrate(|x: f64| (-x).exp() * (10.0 * x).sin(), 0.0, 37.0, &opts)?;
    println!("damped sine: {:.15} +- {:.1e}  (exact {:.15})", r.value, r.abs_err, 10.0 / 101.0);
    // integrable endpoint singularity
    let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &opts)?;
    println!("x^-1/2 on (0,1): {:.12} +- {:.1e}", r.value, r.abs_err);
    Ok(())
}
