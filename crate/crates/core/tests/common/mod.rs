#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use stable_kolmogorov::path::{simulate_path, HitRecord, Injected, PathRecord, SimOptions};
use stable_kolmogorov::{DtPolicy, PlaneState, StableLaw};

/// First zero of `X` on a uniform grid of step `h` and on the halved grid,
/// driven by the same noise: fine increments are drawn once and summed in
/// pairs for the coarse path.
pub fn refinement_pair<R: Rng>(
    law: &StableLaw,
    start: PlaneState,
    h: f64,
    horizon: f64,
    rng: &mut R,
) -> (Option<HitRecord>, Option<HitRecord>) {
    let sampler = law.sampler();
    let fine_steps = (2.0 * horizon / h).ceil() as usize;
    let fine: Vec<f64> = (0..fine_steps).map(|_| sampler.sample_increment(0.5 * h, rng)).collect();
    let coarse: Vec<f64> = fine.chunks(2).map(|c| c.iter().sum()).collect();
    let run = |step: f64, incs: Vec<f64>| {
        let opts = SimOptions::new(horizon, DtPolicy::uniform(step)).endpoints().max_hits(1);
        simulate_path(law, start, &opts, &mut Injected(incs.into_iter())).ok()?.hits.first().copied()
    };
    (run(h, coarse), run(0.5 * h, fine))
}

/// Checks the path-level invariants; returns a description of the first
/// violation.
pub fn check_invariants(path: &PathRecord) -> Result<(), String> {
    for w in path.hits.windows(2) {
        if w[1].time < w[0].time {
            return Err(format!("hit times decrease: {} then {}", w[0].time, w[1].time));
        }
        if w[0].sign == w[1].sign {
            return Err(format!("hits {} and {} cross in the same direction", w[0].n, w[1].n));
        }
    }
    for (node, omega) in path.grid.iter().zip(&path.omega) {
        let n = path.hits_before(node.t) as f64;
        if (omega + PI * n).abs() >= 2.0 * PI {
            return Err(format!("|omega + pi N| = {} at t = {}", (omega + PI * n).abs(), node.t));
        }
    }
    Ok(())
}
