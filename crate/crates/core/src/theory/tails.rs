//! Tail classes `z^{−ν}(log z)^n` and the product rule for independent
//! positive variables, with a quadrature oracle for the rule.

use serde::{Deserialize, Serialize};

use super::TheoryError;
use crate::path::Region;
use crate::quad::{integrate, Integral, QuadOptions};
use crate::stable::{Degenerate, StableLaw};

/// Relative tolerance under which two exponents count as equal.
const EXPONENT_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailClass {
    pub exponent: f64,
    pub logpow: u32,
}

impl TailClass {
    pub fn new(exponent: f64, logpow: u32) -> Self {
        assert!(exponent > 0.0, "tail exponent must be positive, got {exponent}");
        Self { exponent, logpow }
    }

    fn ties(&self, other: &TailClass) -> bool {
        (self.exponent - other.exponent).abs() <= EXPONENT_TIE * self.exponent.max(other.exponent)
    }

    /// The heavier of two tails, i.e. the tail class of a sum.
    pub fn heavier(self, other: TailClass) -> TailClass {
        if self.ties(&other) {
            if self.logpow >= other.logpow {
                self
            } else {
                other
            }
        } else if self.exponent < other.exponent {
            self
        } else {
            other
        }
    }
}

/// Tail class of `XY` for independent `X`, `Y`: equal exponents add their
/// log powers plus one, otherwise the lighter factor is invisible.
/// Arguments may be given in either order.
pub fn tail_product_predict(x: TailClass, y: TailClass) -> TailClass {
    let (x, y) = if x.exponent <= y.exponent { (x, y) } else { (y, x) };
    if x.ties(&y) {
        TailClass::new(x.exponent, x.logpow + y.logpow + 1)
    } else {
        x
    }
}

/// Tail classes of the `n` factors whose product is the `n`-th summand of
/// the half-winding time: `|L_{T₀}|^α`, then `ℓ_j^α` for the intermediate
/// excursions, then the last excursion time. Every factor of an excursion
/// starting below the axis has exponent `θ`, above the axis `θ̄`.
fn summand_factors(law: &StableLaw, k: usize, region: Region) -> Vec<TailClass> {
    let (own, other) = match region {
        Region::PPlus => (law.theta_bar(), law.theta()),
        _ => (law.theta(), law.theta_bar()),
    };
    (1..=k)
        .map(|j| TailClass::new(if j % 2 == 1 { own } else { other }, 0))
        .collect()
}

/// Tail class of the `k`-th summand `S_k`, folded factor by factor with
/// [`tail_product_predict`].
pub fn summand_tail_class(law: &StableLaw, k: usize, region: Region) -> Result<TailClass, TheoryError> {
    if law.degenerate_winding() {
        return Err(Degenerate { rho: law.rho() }.into());
    }
    if k == 0 || region == Region::Origin {
        return Err(TheoryError::InvalidArgument(format!("summand {k} from {region:?}")));
    }
    let factors = summand_factors(law, k, region);
    Ok(factors[1..].iter().fold(factors[0], |acc, &c| tail_product_predict(acc, c)))
}

/// Tail class of `T₀⁽ⁿ⁾ = S₁ + … + S_n`, the heaviest summand.
pub fn theorem_b_by_folding(law: &StableLaw, n: usize, region: Region) -> Result<TailClass, TheoryError> {
    let mut acc = summand_tail_class(law, 1, region)?;
    for k in 2..=n {
        acc = acc.heavier(summand_tail_class(law, k, region)?);
    }
    Ok(acc)
}

/// An exact survival function for the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailSpec {
    /// `P[X = c] = 1`.
    PointMass(f64),
    /// `P[X > z] = (z/z0)^{−ν} (log z / log z0)^n` for `z ≥ z0`, and 1 below.
    PowerLog { exponent: f64, logpow: u32, z0: f64 },
}

impl TailSpec {
    pub fn pareto(exponent: f64) -> Self {
        TailSpec::PowerLog { exponent, logpow: 0, z0: 1.0 }
    }

    fn validate(&self) -> Result<(), TheoryError> {
        let ok = match *self {
            TailSpec::PointMass(c) => c > 0.0 && c.is_finite(),
            TailSpec::PowerLog { exponent, logpow, z0 } => {
                // monotone survival needs log z0 ≥ n/ν
                exponent > 0.0 && z0 >= 1.0 && (logpow == 0 || z0.ln() >= logpow as f64 / exponent)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(TheoryError::InvalidArgument(format!("not a survival function: {self:?}")))
        }
    }

    /// `log P[X > z]` (−∞ when the probability is 0).
    pub fn log_survival(&self, z: f64) -> f64 {
        match *self {
            TailSpec::PointMass(c) => {
                if z < c {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            TailSpec::PowerLog { exponent, logpow, z0 } => {
                if z <= z0 {
                    0.0
                } else if logpow == 0 {
                    -exponent * (z / z0).ln()
                } else {
                    -exponent * (z / z0).ln() + logpow as f64 * (z.ln() / z0.ln()).ln()
                }
            }
        }
    }

    pub fn survival(&self, z: f64) -> f64 {
        self.log_survival(z).exp()
    }

    /// `z·f(z)` for the continuous case, i.e. the density in `log z`.
    fn density_in_log(&self, z: f64) -> f64 {
        match *self {
            TailSpec::PointMass(_) => unreachable!("point masses are handled separately"),
            TailSpec::PowerLog { exponent, logpow, z0 } => {
                if z <= z0 {
                    0.0
                } else {
                    self.survival(z) * (exponent - logpow as f64 / z.ln())
                }
            }
        }
    }
}

/// `P[XY > z]` on a grid of `z`, see [`tail_product_survival`].
pub fn tail_product_oracle(x: &TailSpec, y: &TailSpec, z_grid: &[f64]) -> Result<Vec<Integral>, TheoryError> {
    x.validate()?;
    y.validate()?;
    z_grid.iter().map(|&z| tail_product_survival(x, y, z)).collect()
}

/// `P[XY > z]` for independent `X`, `Y` by adaptive quadrature of
/// `∫ P[X > z/y] P[Y ∈ dy]` in the variable `log y`.
pub fn tail_product_survival(x: &TailSpec, y: &TailSpec, z: f64) -> Result<Integral, TheoryError> {
    x.validate()?;
    y.validate()?;
    if !(z > 0.0) {
        return Err(TheoryError::InvalidArgument(format!("z = {z}")));
    }
    match (*x, *y) {
        (_, TailSpec::PointMass(c)) => Ok(Integral { value: x.survival(z / c), abs_err: 0.0 }),
        (TailSpec::PointMass(c), _) => Ok(Integral { value: y.survival(z / c), abs_err: 0.0 }),
        (TailSpec::PowerLog { z0: x0, .. }, TailSpec::PowerLog { z0: y0, .. }) => {
            // for y > z/x0 the first factor is certain to exceed z/y
            let split = z / x0;
            let certain = y.survival(split.max(y0));
            if split <= y0 {
                return Ok(Integral { value: certain, abs_err: 0.0 });
            }
            let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 4000 };
            let inner = integrate(
                |u: f64| {
                    let yv = u.exp();
                    x.survival(z / yv) * y.density_in_log(yv)
                },
                y0.ln(),
                split.ln(),
                &opts,
            )?;
            Ok(Integral { value: inner.value + certain, abs_err: inner.abs_err })
        }
    }
}
