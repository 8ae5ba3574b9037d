//! Closed forms: Mellin transforms of the return speeds, log-moments, density
//! exponents and the tail classes of the half-winding times.

mod harmonic;
mod tails;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::open_writer;
use crate::path::Region;
use crate::quad::QuadError;
use crate::stable::{Degenerate, StableLaw};

pub use harmonic::{harmonic_mellin, HarmonicOptions};
pub use tails::{
    summand_tail_class, tail_product_oracle, tail_product_predict, tail_product_survival, theorem_b_by_folding, TailClass,
    TailSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("s = {s} is outside the Mellin strip (-{bound}, {bound})")]
    OutsideStrip { s: f64, bound: f64 },
    #[error(transparent)]
    Degenerate(#[from] Degenerate),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("oscillatory integral needs more than {panels} panels before the damping truncation")]
    OscillationOverflow { panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MellinMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// `E[Z^{s−1}]` with its provenance and an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinValue {
    pub s: f64,
    pub value: f64,
    pub method: MellinMethod,
    pub error_bound: f64,
}

fn gamma_for(law: &StableLaw, sign: i8) -> f64 {
    if sign < 0 {
        law.gamma()
    } else {
        law.gamma_bar()
    }
}

fn require_oscillating(law: &StableLaw) -> Result<(), TheoryError> {
    if law.degenerate_winding() {
        return Err(Degenerate { rho: law.rho() }.into());
    }
    Ok(())
}

/// Right end of the Mellin strip of `ℓ±`: the pole `1/(1 − γ±)`, with
/// `γ₋ = γ` and `γ₊ = γ̄`. The strip is symmetric about zero.
pub fn mellin_strip(law: &StableLaw, sign: i8) -> f64 {
    1.0 / (1.0 - gamma_for(law, sign))
}

/// `E[(ℓ±)^{s−1}] = sin(πγ± s) / sin(π(1 − γ±) s)`, where `ℓ−` is the
/// return speed from `(0, −1)` and `ℓ+` from `(0, 1)`.
pub fn mellin_ell(law: &StableLaw, sign: i8, s: f64) -> Result<MellinValue, TheoryError> {
    require_oscillating(law)?;
    let g = gamma_for(law, sign);
    let bound = 1.0 / (1.0 - g);
    if !(s.abs() < bound) {
        return Err(TheoryError::OutsideStrip { s, bound });
    }
    let value = if s == 0.0 {
        g / (1.0 - g)
    } else {
        (PI * g * s).sin() / (PI * (1.0 - g) * s).sin()
    };
    Ok(MellinValue { s, value, method: MellinMethod::ClosedForm, error_bound: 0.0 })
}

/// `E[log ℓ±] = π cot(πγ±)`.
pub fn log_moment_ell(law: &StableLaw, sign: i8) -> Result<f64, TheoryError> {
    require_oscillating(law)?;
    let g = gamma_for(law, sign);
    Ok(PI * (PI * g).cos() / (PI * g).sin())
}

/// Power exponents of the density of `L_{T₀}` started in `P₋`:
/// `f(z) ≈ z^{αθ/γ}` at zero and `z^{−αθ−1}` at infinity. Both equal
/// `1/(1 − γ)`, the distance from 1 to the poles of the Mellin transform.
pub fn density_tail_exponents(law: &StableLaw) -> Result<(f64, f64), TheoryError> {
    require_oscillating(law)?;
    let (a, th, g) = (law.alpha(), law.theta(), law.gamma());
    Ok((a * th / g, a * th + 1.0))
}

/// Tail class of `P[T₀⁽ⁿ⁾ > t]` for a start in `region`.
///
/// Starts in `P₊` are mapped to `P₋` by `(x, y) ↦ (−x, −y)`, which turns
/// the law `(α, ρ)` into `(α, 1 − ρ)` and swaps `θ` and `θ̄`.
pub fn theorem_b_prediction(law: &StableLaw, n: usize, region: Region) -> Result<TailClass, TheoryError> {
    require_oscillating(law)?;
    if n == 0 {
        return Err(TheoryError::InvalidArgument("n must be at least 1".into()));
    }
    match region {
        Region::PMinus => {}
        Region::PPlus => return theorem_b_prediction(&law.reflected(), n, Region::PMinus),
        Region::Origin => return Err(TheoryError::InvalidArgument("start at the origin".into())),
    }
    let rho = law.rho();
    let (theta, theta_bar) = (law.theta(), law.theta_bar());
    let class = if n == 1 {
        TailClass::new(theta, 0)
    } else if rho < 0.5 {
        TailClass::new(theta, ((n - 1) / 2) as u32)
    } else if rho > 0.5 {
        TailClass::new(theta_bar, (n / 2 - 1) as u32)
    } else {
        TailClass::new(theta, (n - 1) as u32)
    };
    Ok(class)
}

/// One row of a prediction table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub alpha: f64,
    pub rho: f64,
    pub region: Region,
    pub n: usize,
    pub exponent: f64,
    pub logpow: u32,
}

pub fn prediction_table(laws: &[StableLaw], n_max: usize) -> Result<Vec<PredictionRow>, TheoryError> {
    let mut rows = Vec::new();
    for law in laws {
        for region in [Region::PMinus, Region::PPlus] {
            for n in 1..=n_max {
                let c = theorem_b_prediction(law, n, region)?;
                rows.push(PredictionRow {
                    alpha: law.alpha(),
                    rho: law.rho(),
                    region,
                    n,
                    exponent: c.exponent,
                    logpow: c.logpow,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes `alpha,rho,region,n,exponent,logpow` rows.
pub fn write_prediction_csv(rows: &[PredictionRow], path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(open_writer(path)?);
    w.write_record(["alpha", "rho", "region", "n", "exponent", "logpow"])?;
    for r in rows {
        let region = match r.region {
            Region::PMinus => "P_MINUS",
            Region::PPlus => "P_PLUS",
            Region::Origin => "ORIGIN",
        };
        w.serialize((r.alpha, r.rho, region, r.n, r.exponent, r.logpow))?;
    }
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn law(a: f64, r: f64) -> StableLaw {
        StableLaw::new(a, r).unwrap()
    }

    fn admissible_grid() -> Vec<StableLaw> {
        let mut v = Vec::new();
        for i in 1..=10 {
            let a = 0.2 * i as f64 - 0.01;
            for j in 1..=10 {
                let (lo, hi) = if a > 1.0 { (1.0 - 1.0 / a, 1.0 / a) } else { (0.0, 1.0) };
                let r = lo + (hi - lo) * j as f64 / 11.0;
                v.push(law(a, r));
            }
        }
        v
    }

    #[test]
    fn mellin_examples() {
        for l in admissible_grid() {
            for sign in [-1, 1] {
                assert_relative_eq!(mellin_ell(&l, sign, 1.0).unwrap().value, 1.0, epsilon = 1e-14);
            }
        }
        let bm = law(2.0, 0.5);
        let v = mellin_ell(&bm, -1, 1.25).unwrap().value;
        assert_relative_eq!(v, (5.0 * PI / 12.0).sin() / (5.0 * PI / 6.0).sin(), epsilon = 1e-14);
        assert_relative_eq!(v, 1.931_851_652_578_136_6, epsilon = 1e-12);
        assert!(matches!(mellin_ell(&bm, -1, 1.5), Err(TheoryError::OutsideStrip { .. })));
        assert!(matches!(mellin_ell(&bm, -1, -1.5), Err(TheoryError::OutsideStrip { .. })));
        assert_relative_eq!(mellin_ell(&bm, -1, 0.0).unwrap().value, 0.5, epsilon = 1e-15);
        // continuity at s = 0
        assert_relative_eq!(mellin_ell(&bm, -1, 1e-7).unwrap().value, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn log_moment_is_mellin_derivative() {
        let bm = law(2.0, 0.5);
        assert_relative_eq!(log_moment_ell(&bm, -1).unwrap(), PI / 3f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(log_moment_ell(&bm, -1).unwrap(), 1.813_799_364_234_217_8, epsilon = 1e-12);
        let h = 1e-6;
        for l in admissible_grid() {
            for sign in [-1, 1] {
                let d = (mellin_ell(&l, sign, 1.0 + h).unwrap().value - mellin_ell(&l, sign, 1.0 - h).unwrap().value)
                    / (2.0 * h);
                let lm = log_moment_ell(&l, sign).unwrap();
                assert!(((d - lm) / lm).abs() < 1e-6, "{l:?} {sign}: {d} vs {lm}");
                assert!(lm > 0.0);
            }
        }
    }

    #[test]
    fn log_moments_average_to_kappa() {
        for l in admissible_grid() {
            let sum = log_moment_ell(&l, -1).unwrap() + log_moment_ell(&l, 1).unwrap();
            assert_relative_eq!(0.5 * l.alpha() * sum, l.kappa().unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn density_exponents() {
        let (z0, zi) = density_tail_exponents(&law(2.0, 0.5)).unwrap();
        assert_relative_eq!(z0, 1.5, epsilon = 1e-14);
        assert_relative_eq!(zi, 1.5, epsilon = 1e-14);
        for l in admissible_grid() {
            let (z0, zi) = density_tail_exponents(&l).unwrap();
            assert!((z0 - 1.0 / (1.0 - l.gamma())).abs() < 1e-12);
            assert!((zi - mellin_strip(&l, -1)).abs() < 1e-12);
        }
    }

    #[test]
    fn theorem_b_examples() {
        let a15 = law(1.5, 0.5);
        let c = theorem_b_prediction(&a15, 2, Region::PMinus).unwrap();
        assert_eq!((c.exponent, c.logpow), (a15.theta(), 1));
        let low = law(1.2, 0.4);
        let c = theorem_b_prediction(&low, 3, Region::PMinus).unwrap();
        assert_eq!((c.exponent, c.logpow), (low.theta(), 1));
        let high = law(1.2, 0.6);
        let c = theorem_b_prediction(&high, 2, Region::PMinus).unwrap();
        assert_eq!((c.exponent, c.logpow), (high.theta_bar(), 0));
        let c = theorem_b_prediction(&law(2.0, 0.5), 1, Region::PMinus).unwrap();
        assert_eq!((c.exponent, c.logpow), (0.25, 0));
    }

    #[test]
    fn theorem_b_regions_agree_at_half_and_mirror_otherwise() {
        for l in admissible_grid() {
            for n in 1..8 {
                let m = theorem_b_prediction(&l, n, Region::PMinus).unwrap();
                let p = theorem_b_prediction(&l, n, Region::PPlus).unwrap();
                if l.rho() == 0.5 {
                    assert_eq!(m, p);
                }
                let mirrored = theorem_b_prediction(&l.reflected(), n, Region::PMinus).unwrap();
                assert_eq!(p, mirrored);
            }
        }
        // from P₊ the first excursion has the θ̄ tail
        let l = law(0.8, 0.3);
        let c = theorem_b_prediction(&l, 1, Region::PPlus).unwrap();
        assert_relative_eq!(c.exponent, l.theta_bar(), epsilon = 1e-15);
    }

    #[test]
    fn degenerate_laws_are_rejected() {
        let sub = law(0.5, 1.0);
        assert!(matches!(mellin_ell(&sub, -1, 1.0), Err(TheoryError::Degenerate(_))));
        assert!(log_moment_ell(&sub, 1).is_err());
        assert!(theorem_b_prediction(&sub, 1, Region::PMinus).is_err());
    }

    #[test]
    fn prediction_csv() {
        let rows = prediction_table(&[law(2.0, 0.5)], 3).unwrap();
        assert_eq!(rows.len(), 6);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pred.csv");
        write_prediction_csv(&rows, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("alpha,rho,region,n,exponent,logpow\n2.0,0.5,P_MINUS,1,0.25,0\n"));
    }
}
