//! Values quoted in the source text, and derived values against
//! independently computed oracles.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use stable_kolmogorov::quad::{integrate, QuadOptions};
use stable_kolmogorov::theory::{
    log_moment_ell, mellin_ell, tail_product_predict, theorem_b_by_folding, theorem_b_prediction, TailClass,
};
use stable_kolmogorov::{Region, StableLaw};

#[test]
fn brownian_constants() {
    let bm = StableLaw::new(2.0, 0.5).unwrap();
    assert_relative_eq!(bm.gamma(), 1.0 / 3.0, epsilon = 1e-15);
    assert_relative_eq!(bm.gamma_bar(), 1.0 / 3.0, epsilon = 1e-15);
    assert_relative_eq!(bm.velocity().unwrap(), -(3f64.sqrt()) / 2.0, epsilon = 1e-14);
    assert_relative_eq!(bm.theta(), 0.25, epsilon = 1e-15);
    assert_relative_eq!(bm.kappa().unwrap(), 2.0 * PI / 3f64.sqrt(), epsilon = 1e-13);
    // the corrected improper integral equals π/√3, the log-moment of ℓ
    assert_relative_eq!(log_moment_ell(&bm, -1).unwrap(), PI / 3f64.sqrt(), epsilon = 1e-13);
}

#[test]
fn velocity_matches_the_sine_form() {
    // −π/κ = −2 sin(πγ) sin(πγ̄) / (α sin(π(γ+γ̄)))
    for (alpha, rho) in [(2.0, 0.5), (1.5, 0.4), (1.2, 0.45), (1.0, 0.3), (0.6, 0.8), (0.3, 0.1)] {
        let law = StableLaw::new(alpha, rho).unwrap();
        let (g, gb) = (law.gamma(), law.gamma_bar());
        let sine = 2.0 * (PI * g).sin() * (PI * gb).sin() / (alpha * (PI * (g + gb)).sin());
        assert_relative_eq!(law.velocity().unwrap(), -sine, epsilon = 1e-13);
    }
}

#[test]
fn log_moment_is_the_derivative_of_the_mellin_transform() {
    // E[log ℓ] = d/ds E[ℓ^{s−1}] at s = 1, by a central difference
    for (alpha, rho) in [(2.0, 0.5), (1.5, 0.4), (0.8, 0.7)] {
        let law = StableLaw::new(alpha, rho).unwrap();
        for sign in [-1i8, 1] {
            let h = 1e-5;
            let d = (mellin_ell(&law, sign, 1.0 + h).unwrap().value - mellin_ell(&law, sign, 1.0 - h).unwrap().value) / (2.0 * h);
            assert_relative_eq!(d, log_moment_ell(&law, sign).unwrap(), epsilon = 1e-7);
        }
    }
}

#[test]
fn mellin_transform_against_a_beta_integral() {
    // ∫₀^∞ u^{a−1}/(1+u) du = π/sin(πa), so the closed form is a ratio of
    // two such integrals with a = (1−γ)s and a = γs
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 2000 };
    let law = StableLaw::new(1.5, 0.5).unwrap();
    let g = law.gamma();
    let beta = |a: f64| {
        // split at 1 and map (1, ∞) to (0, 1) with u = 1/v
        let f = move |u: f64| u.powf(a - 1.0) / (1.0 + u);
        let lower = integrate(f, 0.0, 1.0, &opts).unwrap().value;
        let upper = integrate(move |v: f64| v.powf(-a) / (1.0 + v), 0.0, 1.0, &opts).unwrap().value;
        lower + upper
    };
    for s in [0.3, 0.6, 0.9] {
        let oracle = beta((1.0 - g) * s) / beta(g * s);
        assert_relative_eq!(mellin_ell(&law, -1, s).unwrap().value, oracle, epsilon = 1e-8);
    }
}

#[test]
fn zero_tail_table() {
    let half = StableLaw::new(1.5, 0.5).unwrap();
    assert_eq!(theorem_b_prediction(&half, 2, Region::PMinus).unwrap(), TailClass::new(half.theta(), 1));
    let low = StableLaw::new(1.5, 0.4).unwrap();
    assert_eq!(theorem_b_prediction(&low, 3, Region::PMinus).unwrap(), TailClass::new(low.theta(), 1));
    let high = StableLaw::new(1.5, 0.6).unwrap();
    let c = theorem_b_prediction(&high, 2, Region::PMinus).unwrap();
    assert_relative_eq!(c.exponent, high.theta_bar(), epsilon = 1e-15);
    assert_eq!(c.logpow, 0);
    let bm = StableLaw::new(2.0, 0.5).unwrap();
    assert_eq!(theorem_b_prediction(&bm, 1, Region::PMinus).unwrap(), TailClass::new(0.25, 0));
    for n in 1..=6 {
        let c = theorem_b_prediction(&bm, n, Region::PMinus).unwrap();
        assert_eq!((c.exponent, c.logpow), (0.25, n as u32 - 1));
    }
}

#[test]
fn folding_reproduces_the_table_for_small_rho() {
    let law = StableLaw::new(1.5, 0.35).unwrap();
    for p in 1..=5 {
        let s = theorem_b_by_folding(&law, 2 * p + 1, Region::PMinus).unwrap();
        assert_relative_eq!(s.exponent, law.theta(), epsilon = 1e-15);
        assert_eq!(s.logpow, p as u32);
    }
}

#[test]
fn product_tail_examples() {
    assert_eq!(tail_product_predict(TailClass::new(0.25, 0), TailClass::new(0.25, 0)), TailClass::new(0.25, 1));
    assert_eq!(tail_product_predict(TailClass::new(0.25, 2), TailClass::new(0.75, 5)), TailClass::new(0.25, 2));
}
