//! Run an experiment from code instead of the `skw` binary.
//!
//! ```bash
//! cargo run --release --example experiment
//! ```

use stable_kolmogorov::experiment::{run_experiment, Command, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("skw-example");
    let cfg = ExperimentConfig::default().with_overrides([
        ("alpha", "1.5"),
        ("pool", "3000"),
        ("cascades", "200"),
        ("nmax", "60"),
        ("out", out.to_str().unwrap()),
    ])?;
    let report = run_experiment(Command::TheoremA, &cfg)?;
    for a in &report.assertions {
        println!("{} {}: {:.4} vs {:.4}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.value, a.target);
    }
    println!("files in {}", out.display());
    Ok(())
}
