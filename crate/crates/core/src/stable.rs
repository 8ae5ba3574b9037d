//! Strictly α-stable laws in the `(α, ρ)` parametrization.
//!
//! The characteristic exponent is
//! `Ψ(λ) = log E[exp(iλL₁)] = −|λ|^α exp(−iπα(ρ − ½) sgn λ)`,
//! with `ρ = P[L₁ ≥ 0]` and unit scale. For `α = 2` this is `√2·B₁`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, Open01};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const ADMISSIBLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameters out of range: alpha = {alpha} must lie in (0, 2], rho = {rho} in [0, 1]")]
    OutOfRange { alpha: f64, rho: f64 },
    #[error("no strictly {alpha}-stable law has positivity parameter rho = {rho}")]
    Inadmissible { alpha: f64, rho: f64 },
}

/// Winding constants are undefined when `|L|` is a subordinator.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("rho = {rho} makes |L| a subordinator: winding constants are undefined")]
pub struct Degenerate {
    pub rho: f64,
}

/// A validated `(α, ρ)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    alpha: f64,
    rho: f64,
}

impl StableLaw {
    /// Validates `(α, ρ)`.
    ///
    /// For `α > 1` a strictly stable law must have `ρ ∈ [1 − 1/α, 1/α]`; this is
    /// the classical admissibility range (the cosine in `Ψ` must stay positive).
    pub fn new(alpha: f64, rho: f64) -> Result<Self, ParamError> {
        if !(alpha > 0.0 && alpha <= 2.0) || !(0.0..=1.0).contains(&rho) {
            return Err(ParamError::OutOfRange { alpha, rho });
        }
        if alpha > 1.0 {
            let lo = 1.0 - 1.0 / alpha;
            let hi = 1.0 / alpha;
            if rho < lo - ADMISSIBLE_SLACK || rho > hi + ADMISSIBLE_SLACK {
                return Err(ParamError::Inadmissible { alpha, rho });
            }
        }
        // at α = 2 the range above collapses to {1/2}; snap rounding noise
        let rho = if alpha == 2.0 { 0.5 } else { rho };
        Ok(Self { alpha, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `ρ ∈ {0, 1}`: `|L|` is a stable subordinator and `Z` stops winding.
    pub fn degenerate_winding(&self) -> bool {
        self.rho == 0.0 || self.rho == 1.0
    }

    /// `α = 1` with `ρ ≠ 1/2` is a Cauchy law with drift.
    pub fn alpha_one(&self) -> bool {
        self.alpha == 1.0 && self.rho != 0.5
    }

    /// The law of `−L`, i.e. `(α, 1 − ρ)`.
    pub fn reflected(&self) -> Self {
        Self { alpha: self.alpha, rho: 1.0 - self.rho }
    }

    /// `πα(ρ − ½)`, the phase of the characteristic exponent.
    pub fn phase(&self) -> f64 {
        PI * self.alpha * (self.rho - 0.5)
    }

    pub fn gamma(&self) -> f64 {
        self.rho * self.alpha / (1.0 + self.alpha)
    }

    pub fn gamma_bar(&self) -> f64 {
        (1.0 - self.rho) * self.alpha / (1.0 + self.alpha)
    }

    /// Persistence exponent of `T₀` from the left half-plane.
    pub fn theta(&self) -> f64 {
        self.rho / (1.0 + self.alpha * (1.0 - self.rho))
    }

    /// Persistence exponent of `T₀` from the right half-plane.
    pub fn theta_bar(&self) -> f64 {
        (1.0 - self.rho) / (1.0 + self.alpha * self.rho)
    }

    /// Exponential growth rate of the half-winding times.
    pub fn kappa(&self) -> Result<f64, Degenerate> {
        if self.degenerate_winding() {
            return Err(Degenerate { rho: self.rho });
        }
        let (g, gb) = (self.gamma(), self.gamma_bar());
        Ok(0.5 * PI * self.alpha * (cot(PI * g) + cot(PI * gb)))
    }

    /// Almost-sure limit of `ω(t)/log t`.
    pub fn velocity(&self) -> Result<f64, Degenerate> {
        if self.degenerate_winding() {
            return Err(Degenerate { rho: self.rho });
        }
        let (g, gb) = (self.gamma(), self.gamma_bar());
        Ok(-2.0 * (PI * g).sin() * (PI * gb).sin() / (self.alpha * (PI * (g + gb)).sin()))
    }

    /// Damping coefficient of the characteristic exponent of `∫₀ᵗ L`.
    pub fn c_scale(&self) -> f64 {
        self.phase().cos() / (self.alpha + 1.0)
    }

    /// Phase coefficient of the characteristic exponent of `∫₀ᵗ L`.
    pub fn s_scale(&self) -> f64 {
        self.phase().sin() / (self.alpha + 1.0)
    }

    pub fn derived_constants(&self) -> DerivedConstants {
        DerivedConstants {
            gamma: self.gamma(),
            gamma_bar: self.gamma_bar(),
            theta: self.theta(),
            theta_bar: self.theta_bar(),
            kappa: self.kappa().ok(),
            velocity: self.velocity().ok(),
            c_scale: self.c_scale(),
            s_scale: self.s_scale(),
        }
    }

    /// `Ψ(λ) = −|λ|^α exp(−iπα(ρ − ½) sgn λ)`.
    pub fn char_exponent(&self, lambda: f64) -> Complex64 {
        if lambda == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = -self.phase() * lambda.signum();
        -lambda.abs().powf(self.alpha) * Complex64::from_polar(1.0, phase)
    }

    pub fn sampler(&self) -> StableSampler {
        StableSampler::new(*self)
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// Closed-form constants attached to a law. `kappa` and `velocity` are `None`
/// in the degenerate cases `ρ ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub gamma: f64,
    pub gamma_bar: f64,
    pub theta: f64,
    pub theta_bar: f64,
    pub kappa: Option<f64>,
    pub velocity: Option<f64>,
    pub c_scale: f64,
    pub s_scale: f64,
}

/// Chambers–Mallows–Stuck sampler written directly in `(α, ρ)`.
///
/// With `U` uniform on `(−π/2, π/2)`, `W ~ Exp(1)` and shift `B = π(ρ − ½)`,
/// `sin(α(U+B)) / cos(U)^{1/α} · (cos(U − α(U+B)) / W)^{(1−α)/α}` has
/// characteristic exponent `Ψ`. At `α = 1` the last factor is 1 and the draw is
/// `sin(πρ)·tan U − cos(πρ)`, a Cauchy law with the drift that makes
/// `P[L₁ ≥ 0] = ρ`.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    law: StableLaw,
    inv_alpha: f64,
    tail_power: f64,
    shift: f64,
}

impl StableSampler {
    pub fn new(law: StableLaw) -> Self {
        let alpha = law.alpha();
        Self {
            law,
            inv_alpha: 1.0 / alpha,
            tail_power: (1.0 - alpha) / alpha,
            shift: PI * (law.rho() - 0.5),
        }
    }

    pub fn law(&self) -> StableLaw {
        self.law
    }

    /// One draw of `L₁`.
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let alpha = self.law.alpha();
        let u: f64 = rng.sample(Open01);
        let u = PI * u - FRAC_PI_2;
        if self.tail_power == 0.0 {
            // α = 1
            let w = u + self.shift;
            return w.sin() / u.cos();
        }
        let w: f64 = rng.sample(Exp1);
        let v = alpha * (u + self.shift);
        let head = v.sin() / u.cos().powf(self.inv_alpha);
        let tail = ((u - v).cos() / w).powf(self.tail_power);
        head * tail
    }

    /// One draw of `L_dt = dt^{1/α} L₁`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        debug_assert!(dt > 0.0);
        dt.powf(self.inv_alpha) * self.sample_unit(rng)
    }
}
