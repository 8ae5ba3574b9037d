//! Mellin transform of the harmonic measure `P_{(x,y)}[L_{T₀} ∈ ·]` by
//! nested quadrature.
//!
//! With `ν = 1 − s/(1+α)` and `a = πα(ρ − ½)`,
//!
//! ```text
//! E[L_{T₀}^{s−1}] = α ∫₀^∞ w^{−s} J(w) dw / ((1+α)^{1−ν} Γ(1−ν) Γ(1−s) sin(πs(1−γ)))
//! J(w) = Im[e^{iπν/2} ∫₀^∞ μ^{ν−1} exp(iμm − e^{−ia} μ^α/(1+α)) dμ],   m = x w^{1+α} + y w,
//! ```
//!
//! which is the time integral of `E[X_t^{−ν}; X_t > 0]` after the Fourier
//! representation of the positive part and the substitutions
//! `λ = μ t^{−(1+α)/α}`, `w = t^{−1/α}`. The μ-integral is taken along a
//! ray `μ = r e^{±iφ}` turned towards the decaying side of `e^{iμm}`, so the
//! linear phase becomes damped and the truncation point is finite for
//! every `w`.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::gamma;

use super::{MellinMethod, MellinValue, TheoryError};
use crate::path::{PlaneState, Region};
use crate::quad::{integrate, Integral, QuadOptions};
use crate::stable::StableLaw;

/// `−log` of the damping factor at which the μ-integral is cut.
const DAMPING_CUTOFF: f64 = 36.841_361_487_904_734; // −ln 1e−16

#[derive(Debug, Clone, Copy)]
pub struct HarmonicOptions {
    /// Tolerances of the outer `w`-integral.
    pub outer: QuadOptions,
    /// Tolerances of each quarter-period panel of the inner integral.
    pub inner: QuadOptions,
    /// Cap on the number of inner panels per `w`.
    pub max_panels: usize,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self {
            outer: QuadOptions { abs_tol: 1e-10, rel_tol: 1e-9, max_intervals: 1000 },
            inner: QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 200 },
            max_panels: 20_000,
        }
    }
}

struct Inner {
    alpha: f64,
    a: f64,
    nu: f64,
    x: f64,
    y: f64,
}

impl Inner {
    /// `J(w)` with its absolute error.
    fn eval(&self, w: f64, opts: &HarmonicOptions) -> Result<Integral, TheoryError> {
        let (alpha, nu) = (self.alpha, self.nu);
        let m = self.x * w.powf(alpha + 1.0) + self.y * w;
        let sigma = if m < 0.0 { -1.0 } else { 1.0 };
        let phi = if m == 0.0 { 0.0 } else { 0.5 * FRAC_PI_2.min((FRAC_PI_2 + sigma * self.a) / alpha) };
        let beta = sigma * alpha * phi - self.a;
        let linear_damp = m.abs() * phi.sin();
        let power_damp = beta.cos() / (1.0 + alpha);
        let linear_freq = m.abs() * phi.cos();
        let power_freq = beta.sin().abs() / (1.0 + alpha);
        let base_phase = FRAC_PI_2 * nu + sigma * phi * nu;

        // r^{ν−1} is left out; it is below 1 past r = 1 and absorbed by the
        // substitution on the first panel
        let g = |r: f64| {
            let re = -linear_damp * r - power_damp * r.powf(alpha);
            let im = m * phi.cos() * r - beta.sin() * r.powf(alpha) / (1.0 + alpha);
            re.exp() * (base_phase + im).sin()
        };

        let damping = |r: f64| linear_damp * r + power_damp * r.powf(alpha);
        let mut r_max = 1.0;
        while damping(r_max) < DAMPING_CUTOFF {
            r_max *= 2.0;
        }
        while damping(0.5 * r_max) >= DAMPING_CUTOFF {
            r_max *= 0.5;
        }
        let phase = |r: f64| linear_freq * r + power_freq * r.powf(alpha);
        let total_phase = phase(r_max);
        let panels = (total_phase / FRAC_PI_2).ceil().max(1.0) as usize;
        if panels > opts.max_panels {
            return Err(TheoryError::OscillationOverflow { panels });
        }

        // breakpoints at equal increments of the (monotone) phase
        let mut breaks = Vec::with_capacity(panels + 1);
        breaks.push(0.0);
        for k in 1..panels {
            let target = total_phase * k as f64 / panels as f64;
            let (mut lo, mut hi) = (breaks[k - 1], r_max);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if phase(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            breaks.push(0.5 * (lo + hi));
        }
        breaks.push(r_max);

        let first = breaks[1];
        let mut total = integrate(|u: f64| g(u.powf(1.0 / nu)), 0.0, first.powf(nu), &opts.inner)?.scale(1.0 / nu);
        for win in breaks[1..].windows(2) {
            total = total + integrate(|r: f64| r.powf(nu - 1.0) * g(r), win[0], win[1], &opts.inner)?;
        }
        Ok(total)
    }
}

/// `E_{(x,y)}[L_{T₀}^{s−1}]` for a start in `P₋` and `s ∈ (0, 1)`.
pub fn harmonic_mellin(
    law: &StableLaw,
    start: PlaneState,
    s: f64,
    opts: &HarmonicOptions,
) -> Result<MellinValue, TheoryError> {
    if law.degenerate_winding() {
        return Err(crate::stable::Degenerate { rho: law.rho() }.into());
    }
    if start.region() != Region::PMinus {
        return Err(TheoryError::InvalidArgument(format!("start {start:?} is not in the left half-plane")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(TheoryError::InvalidArgument(format!("s = {s} outside (0, 1)")));
    }
    let alpha = law.alpha();
    let nu = 1.0 - s / (1.0 + alpha);
    let inner = Inner { alpha, a: law.phase(), nu, x: start.x, y: start.y };

    let failure: Cell<Option<TheoryError>> = Cell::new(None);
    let worst_inner = Cell::new(0.0f64);
    let eval = |w: f64, jac: f64| -> f64 {
        match inner.eval(w, opts) {
            Ok(v) => {
                worst_inner.set(worst_inner.get().max(v.abs_err * jac));
                v.value * jac
            }
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };

    // t ≥ 1 side: w = v^{1/(1−s)} turns w^{−s} dw into dv/(1−s)
    let p = 1.0 / (1.0 - s);
    let near = integrate(|v: f64| eval(v.powf(p), p), 0.0, 1.0, &opts.outer);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    // t ≤ 1 side: w = 1/v
    let far = integrate(|v: f64| eval(1.0 / v, v.powf(s - 2.0)), 0.0, 1.0, &opts.outer);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let total = near? + far?;

    let denom = (1.0 + alpha).powf(1.0 - nu) * gamma(1.0 - nu) * gamma(1.0 - s) * (PI * s * (1.0 - law.gamma())).sin();
    let scale = alpha / denom;
    Ok(MellinValue {
        s,
        value: scale * total.value,
        method: MellinMethod::Quadrature,
        error_bound: scale.abs() * (total.abs_err + 2.0 * worst_inner.get()) + 1e-14,
    })
}
