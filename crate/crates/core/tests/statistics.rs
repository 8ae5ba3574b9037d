//! Statistical behaviour of return pools and cascades.

use rand::seq::SliceRandom;
use stable_kolmogorov::cascade::{column_at, run_cascades, Live, Pools, ReturnPool};
use stable_kolmogorov::path::{simulate_path, Sampled, SimOptions, DEFAULT_RETURN_CAP};
use stable_kolmogorov::rng::StreamFamily;
use stable_kolmogorov::stats::{hill, ks_two_sample};
use stable_kolmogorov::theory::{density_tail_exponents, theorem_b_prediction};
use stable_kolmogorov::{DtPolicy, PlaneState, Region, StableLaw};

fn pools(law: &StableLaw, size: usize, seed: u64) -> (ReturnPool, ReturnPool) {
    let fam = StreamFamily::new(seed);
    let p = DtPolicy::natural(0.01);
    (
        ReturnPool::simulate(law, -1, size, &p, DEFAULT_RETURN_CAP, &fam.domain("returns-minus")).unwrap(),
        ReturnPool::simulate(law, 1, size, &p, DEFAULT_RETURN_CAP, &fam.domain("returns-plus")).unwrap(),
    )
}

#[test]
fn permuting_pools_leaves_cascades_in_law() {
    let law = StableLaw::new(1.5, 0.5).unwrap();
    let (minus, plus) = pools(&law, 3_000, 21);
    let mut rng = StreamFamily::new(5).stream(0);
    let shuffle = |p: &ReturnPool, rng: &mut _| {
        let mut s = p.samples.clone();
        s.shuffle(rng);
        ReturnPool::from_samples(p.sign, s)
    };
    let (m2, p2) = (shuffle(&minus, &mut rng), shuffle(&plus, &mut rng));
    let fam = StreamFamily::new(8).domain("cascades");
    let a = run_cascades(&law, &Pools::new(&minus, &plus).unwrap(), -1, 20, 2_000, &fam).unwrap();
    let b = run_cascades(&law, &Pools::new(&m2, &p2).unwrap(), -1, 20, 2_000, &fam).unwrap();
    let ks = ks_two_sample(&column_at(&a, 20, false), &column_at(&b, 20, false));
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn rate_variance_shrinks_like_one_over_n() {
    let law = StableLaw::new(2.0, 0.5).unwrap();
    let (minus, plus) = pools(&law, 4_000, 3);
    let runs = run_cascades(&law, &Pools::new(&minus, &plus).unwrap(), -1, 100, 800, &StreamFamily::new(4)).unwrap();
    let scaled: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|&n| {
            let v: Vec<f64> = column_at(&runs, n, false).iter().map(|t| t / n as f64).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            n as f64 * v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        })
        .collect();
    for w in scaled.windows(2) {
        let r = w[1] / w[0];
        assert!((0.6..1.6).contains(&r), "n·var = {scaled:?}");
    }
}

#[test]
fn cascade_second_zero_matches_direct_simulation() {
    // T₀⁽²⁾ from (0, −1): simulated directly, and through one cascade step
    let law = StableLaw::new(1.5, 0.5).unwrap();
    let fam = StreamFamily::new(12);
    let policy = DtPolicy::natural(0.01);
    let opts = SimOptions::new(DEFAULT_RETURN_CAP, policy).endpoints().max_hits(2);
    let direct: Vec<f64> = (0..3_000u64)
        .map(|i| {
            let mut rng = fam.domain("direct").stream(i);
            let p = simulate_path(&law, PlaneState::new(0.0, -1.0), &opts, &mut Sampled::new(law, &mut rng)).unwrap();
            p.hits.get(1).map_or(DEFAULT_RETURN_CAP, |h| h.time).ln()
        })
        .collect();
    let live = Live { law, policy, cap: DEFAULT_RETURN_CAP };
    let runs = run_cascades(&law, &live, -1, 2, 3_000, &fam.domain("cascade")).unwrap();
    let ks = ks_two_sample(&direct, &column_at(&runs, 2, false));
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn return_speed_density_exponent_near_zero() {
    // P[ℓ⁻ < z] ≈ c z^{a+1} with a = 1/(1−γ); the Hill index of 1/ℓ⁻ estimates a + 1
    for (alpha, rho) in [(2.0, 0.5), (1.5, 0.4)] {
        let law = StableLaw::new(alpha, rho).unwrap();
        let (minus, _) = pools(&law, 20_000, 17);
        let inv: Vec<f64> = minus.ells().iter().map(|l| 1.0 / l).collect();
        let fit = hill(&inv, Some(400)).unwrap();
        let (at_zero, _) = density_tail_exponents(&law).unwrap();
        assert!(
            (fit.exponent_hat - (at_zero + 1.0)).abs() < 0.2 * (at_zero + 1.0),
            "({alpha}, {rho}): Hill {} vs {}",
            fit.exponent_hat,
            at_zero + 1.0
        );
    }
}

#[test]
fn monotone_l_crosses_at_most_once() {
    // ρ = 1: L only jumps up, so X turns around at most once
    let law = StableLaw::new(0.8, 1.0).unwrap();
    assert!(law.kappa().is_err() && law.velocity().is_err());
    assert!(theorem_b_prediction(&law, 2, Region::PMinus).is_err());
    let fam = StreamFamily::new(2);
    let opts = SimOptions::new(1e8, DtPolicy::natural(0.01));
    for i in 0..100 {
        let mut rng = fam.stream(i);
        let path = simulate_path(&law, PlaneState::new(-1.0, -1.0), &opts, &mut Sampled::new(law, &mut rng)).unwrap();
        assert!(path.hits.len() <= 1, "stream {i}: {} zeros", path.hits.len());
        assert!(path.grid.windows(2).all(|w| w[1].l >= w[0].l));
    }
}
