//! Simulate one path of `(X, L)` and follow its winding around the origin.
//!
//! Writes `path_grid.csv` and `path_hits.csv` into the working directory.
//!
//! ```bash
//! cargo run --release --example single_path
//! ```

use std::f64::consts::PI;
use std::path::Path;

use stable_kolmogorov::path::{simulate_path, Sampled, SimOptions};
use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::{DtPolicy, PlaneState, StableLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = StableLaw::new(1.5, 0.5)?;
    let mut rng = StreamFamily::new(11).domain("example").stream(0);
    let opts = SimOptions::new(1e6, DtPolicy::natural(0.01));
    let path = simulate_path(&law, PlaneState::new(-1.0, 0.0), &opts, &mut Sampled::new(law, &mut rng))?;

    println!("{} steps up to t = {:.3e}, {} zeros of X", path.steps, path.end_time(), path.hits.len());
    for h in path.hits.iter().take(8) {
        println!("  zero {:2}: t = {:11.4e}  L = {:+10.4e}  omega = {:+8.4}", h.n, h.time, h.speed, h.omega);
    }
    // each zero is half a turn, so ω + πN stays within one turn
    let n = path.hits.len() as f64;
    println!("final omega = {:.4}, omega + pi N = {:.4}", path.final_omega(), path.final_omega() + PI * n);
    if let Ok(v) = law.velocity() {
        println!("omega / log t = {:.3} (velocity {v:.3})", path.final_omega() / path.end_time().ln());
    }
    path.write_grid_csv(Path::new("path_grid.csv"))?;
    path.write_hits_csv(Path::new("path_hits.csv"))?;
    Ok(())
}
