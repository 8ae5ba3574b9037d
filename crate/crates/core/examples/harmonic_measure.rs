//! Mellin transform of the exit speed through the vertical axis: quadrature
//! against the closed form on the axis, and off the axis.
//!
//! ```bash
//! cargo run --release --example harmonic_measure
//! ```

use stable_kolmogorov::theory::{harmonic_mellin, mellin_ell, HarmonicOptions};
use stable_kolmogorov::{PlaneState, StableLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = StableLaw::new(2.0, 0.5)?;
    let opts = HarmonicOptions::default();
    println!("start (0,-1)");
    for s in [0.25, 0.5, 0.75] {
        let q = harmonic_mellin(&law, PlaneState::new(0.0, -1.0), s, &opts)?;
        let exact = mellin_ell(&law, -1, s)?;
        println!("  s = {s}: quadrature {:.12} (+- {:.1e})  closed form {:.12}", q.value, q.error_bound, exact.value);
    }
    println!("start (-1,-1)");
    for s in [0.25, 0.5, 0.75] {
        let q = harmonic_mellin(&law, PlaneState::new(-1.0, -1.0), s, &opts)?;
        println!("  s = {s}: quadrature {:.8} (+- {:.1e})", q.value, q.error_bound);
    }
    Ok(())
}
