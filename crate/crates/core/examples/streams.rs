//! Reproducible parallel streams: results do not depend on the thread count.
//!
//! ```bash
//! cargo run --release --example streams
//! ```

use rayon::prelude::*;
use stable_kolmogorov::path::sample_return;
use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::{DtPolicy, StableLaw};

fn mean_log_tau(threads: usize) -> f64 {
    let law = StableLaw::new(1.5, 0.5).unwrap();
    let family = StreamFamily::new(2024).domain("demo");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let logs: Vec<f64> = (0..2_000u64)
            .into_par_iter()
            .map(|i| {
                let r = sample_return(&law, -1, &DtPolicy::natural(0.01), 1e20, &mut family.stream(i)).unwrap();
                r.tau.ln()
            })
            .collect();
        logs.iter().sum::<f64>() / logs.len() as f64
    })
}

fn main() {
    let a = mean_log_tau(1);
    let b = mean_log_tau(4);
    println!("1 thread: {a:.15}\n4 threads: {b:.15}\nidentical: {}", a == b);
}
