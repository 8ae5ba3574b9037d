//! Heavy-tail statistics: empirical survival curves with censoring, tail
//! fits, Monte Carlo Mellin transforms and characteristic-function checks.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::open_writer;
use crate::stable::StableLaw;
use crate::theory::{MellinMethod, MellinValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no samples")]
    Empty,
    #[error("all {0} samples are censored")]
    AllCensored(usize),
    #[error("only {points} curve points in the fit window, need {need}")]
    WindowTooSparse { points: usize, need: usize },
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error("samples must be positive and finite, found {0}")]
    BadSample(f64),
}

/// Right-continuous empirical survival `P̂[Z > z]`, evaluated at the
/// distinct uncensored sample values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub points: Vec<(f64, f64)>,
    pub n_total: usize,
    pub n_censored: usize,
    pub censor_level: Option<f64>,
}

/// Samples at or above `censored_at` are censored: they are known to exceed
/// every point of the curve but never enter it.
pub fn survival_curve(samples: &[f64], censored_at: Option<f64>) -> Result<SurvivalCurve, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&bad) = samples.iter().find(|z| !(**z > 0.0)) {
        return Err(StatsError::BadSample(bad));
    }
    let cut = censored_at.unwrap_or(f64::INFINITY);
    let mut obs: Vec<f64> = samples.iter().copied().filter(|&z| z < cut).collect();
    let n_censored = samples.len() - obs.len();
    if obs.is_empty() {
        return Err(StatsError::AllCensored(samples.len()));
    }
    obs.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut points = Vec::new();
    let mut i = 0;
    while i < obs.len() {
        let z = obs[i];
        let mut j = i;
        while j < obs.len() && obs[j] == z {
            j += 1;
        }
        // everything above z, censored values included
        points.push((z, (samples.len() - j) as f64 / n));
        i = j;
    }
    Ok(SurvivalCurve { points, n_total: samples.len(), n_censored, censor_level: censored_at })
}

impl SurvivalCurve {
    /// `P̂[Z > z]`; `None` past the censoring level, where the curve is
    /// unknown.
    pub fn at(&self, z: f64) -> Option<f64> {
        if self.censor_level.is_some_and(|c| z >= c) {
            return None;
        }
        let idx = self.points.partition_point(|p| p.0 <= z);
        Some(if idx == 0 { 1.0 } else { self.points[idx - 1].1 })
    }

    /// `z,survival` rows.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(open_writer(path)?);
        w.write_record(["z", "survival"])?;
        for &(z, p) in &self.points {
            w.serialize((z, p))?;
        }
        w.into_inner().map_err(|e| e.into_error())?.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    LoglogRegression,
    Hill,
}

/// Which of `log P = c − ν log z + k log log z` are free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    /// `k = 0`, fit `ν`.
    Power,
    /// Fit `ν` and `k` jointly.
    PowerLog,
    /// `ν` pinned, fit `k`.
    LogPowerGivenExponent(f64),
    /// `k` pinned, fit `ν`.
    ExponentGivenLogPower(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent_hat: f64,
    pub logpow_hat: Option<f64>,
    /// Standard error of the exponent (0 when it was pinned).
    pub stderr: f64,
    pub logpow_stderr: Option<f64>,
    pub window: (f64, f64),
    pub method: FitMethod,
    pub model: Option<TailModel>,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 20;

/// Window decades (in probability) of the default fit window.
pub const DEFAULT_WINDOW_DECADES: f64 = 1.5;

/// Largest order statistics left out of the default window.
pub const DEFAULT_WINDOW_SKIP: usize = 10;

/// The top 1.5 decades of the uncensored survival curve, stopping short of
/// the 10 largest order statistics.
pub fn default_window(curve: &SurvivalCurve) -> Result<(f64, f64), StatsError> {
    let usable: Vec<&(f64, f64)> = curve.points.iter().filter(|p| p.1 > 0.0).collect();
    // points with P̂ = k/n sit at the (k+1)-th largest value
    let hi_idx = usable
        .iter()
        .rposition(|p| p.1 * curve.n_total as f64 >= DEFAULT_WINDOW_SKIP as f64 - 0.5)
        .ok_or(StatsError::WindowTooSparse { points: 0, need: MIN_FIT_POINTS })?;
    let (z_hi, p_hi) = *usable[hi_idx];
    let p_lo = p_hi * 10f64.powf(DEFAULT_WINDOW_DECADES);
    let lo_idx = usable.iter().position(|p| p.1 <= p_lo).unwrap_or(0);
    let z_lo = usable[lo_idx].0;
    if !(z_lo < z_hi) {
        return Err(StatsError::WindowTooSparse { points: 1, need: MIN_FIT_POINTS });
    }
    Ok((z_lo, z_hi))
}

/// Ordinary least squares; returns coefficients and their standard errors
/// from the residual variance.
fn ols(design: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let (n, p) = design.shape();
    let svd = design.clone().svd(true, true);
    let beta = svd.solve(y, 1e-14).expect("svd solve");
    let resid = y - design * &beta;
    let dof = (n - p).max(1) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let xtx_inv = (design.transpose() * design).try_inverse().unwrap_or_else(|| DMatrix::zeros(p, p));
    let se = DVector::from_iterator(p, (0..p).map(|i| (sigma2 * xtx_inv[(i, i)]).max(0.0).sqrt()));
    (beta, se)
}

/// Least-squares fit of `log P̂` against `log z` (and `log log z`) over the
/// curve points in `window` (default: [`default_window`]).
pub fn fit_tail(curve: &SurvivalCurve, window: Option<(f64, f64)>, model: TailModel) -> Result<TailFit, StatsError> {
    let (lo, hi) = match window {
        Some(w) => w,
        None => default_window(curve)?,
    };
    if !(lo > 0.0 && lo < hi) {
        return Err(StatsError::InvalidWindow(lo, hi));
    }
    let needs_loglog = !matches!(model, TailModel::Power);
    if needs_loglog && lo <= 1.0 {
        return Err(StatsError::InvalidWindow(lo, hi));
    }
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.0 >= lo && p.0 <= hi && p.1 > 0.0)
        .filter(|p| curve.censor_level.is_none_or(|c| p.0 < c))
        .copied()
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(StatsError::WindowTooSparse { points: pts.len(), need: MIN_FIT_POINTS });
    }
    let n = pts.len();
    let lz: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let llz: Vec<f64> = if needs_loglog { lz.iter().map(|v| v.ln()).collect() } else { vec![0.0; n] };
    let lp: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();

    let fit = |cols: &[&[f64]], y: Vec<f64>| {
        let design = DMatrix::from_fn(n, cols.len() + 1, |i, j| if j == 0 { 1.0 } else { cols[j - 1][i] });
        ols(&design, &DVector::from_vec(y))
    };
    let (exponent_hat, stderr, logpow_hat, logpow_stderr) = match model {
        TailModel::Power => {
            let (b, se) = fit(&[&lz], lp);
            (-b[1], se[1], None, None)
        }
        TailModel::PowerLog => {
            let (b, se) = fit(&[&lz, &llz], lp);
            (-b[1], se[1], Some(b[2]), Some(se[2]))
        }
        TailModel::LogPowerGivenExponent(nu) => {
            let y = lp.iter().zip(&lz).map(|(p, z)| p + nu * z).collect();
            let (b, se) = fit(&[&llz], y);
            (nu, 0.0, Some(b[1]), Some(se[1]))
        }
        TailModel::ExponentGivenLogPower(k) => {
            let y = lp.iter().zip(&llz).map(|(p, l)| p - k * l).collect();
            let (b, se) = fit(&[&lz], y);
            (-b[1], se[1], Some(k), Some(0.0))
        }
    };
    // neighbouring survival points share almost all their samples, so the
    // regression stderr is far too small; floor it at the Hill rate ν/√k
    let stderr = match (curve.n_total, model) {
        (0, _) | (_, TailModel::LogPowerGivenExponent(_)) => stderr,
        (total, _) => {
            let k = (pts[0].1 * total as f64).max(1.0);
            stderr.max(exponent_hat.abs() / k.sqrt())
        }
    };
    Ok(TailFit {
        exponent_hat,
        logpow_hat,
        stderr,
        logpow_stderr,
        window: (lo, hi),
        method: FitMethod::LoglogRegression,
        model: Some(model),
        points: n,
    })
}

/// Hill estimator of the tail index from the `k` largest values
/// (default `⌈n^{2/3}⌉`).
pub fn hill(samples: &[f64], k: Option<usize>) -> Result<TailFit, StatsError> {
    if samples.len() < 3 {
        return Err(StatsError::WindowTooSparse { points: samples.len(), need: 3 });
    }
    let mut v: Vec<f64> = samples.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let k = k.unwrap_or_else(|| (v.len() as f64).powf(2.0 / 3.0).ceil() as usize).clamp(2, v.len() - 1);
    let threshold = v[k];
    if !(threshold > 0.0) {
        return Err(StatsError::BadSample(threshold));
    }
    let mean_log: f64 = v[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    let index = 1.0 / mean_log;
    Ok(TailFit {
        exponent_hat: index,
        logpow_hat: None,
        stderr: index / (k as f64).sqrt(),
        logpow_stderr: None,
        window: (threshold, v[0]),
        method: FitMethod::Hill,
        model: None,
        points: k,
    })
}

/// Monte Carlo `E[Z^{s−1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMellin {
    /// Sample mean; `error_bound` is the jackknife standard error, or
    /// infinite when the variance looks infinite.
    pub estimate: MellinValue,
    /// Jackknife standard error, reported even when flagged.
    pub jackknife_se: f64,
    /// Hill index of `Z^{s−1}`; below 2 the variance is infinite.
    pub tail_index: Option<f64>,
    pub nonfinite_variance: bool,
}

pub fn mc_mellin(samples: &[f64], s: f64) -> Result<McMellin, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&bad) = samples.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
        return Err(StatsError::BadSample(bad));
    }
    if s == 1.0 {
        return Ok(McMellin {
            estimate: MellinValue { s, value: 1.0, method: MellinMethod::MonteCarlo, error_bound: 0.0 },
            jackknife_se: 0.0,
            tail_index: None,
            nonfinite_variance: false,
        });
    }
    let y: Vec<f64> = samples.iter().map(|z| z.powf(s - 1.0)).collect();
    let (value, jackknife_se) = jackknife_mean(&y);
    let tail_index = hill(&y, None).ok().map(|f| f.exponent_hat);
    let nonfinite_variance = tail_index.is_some_and(|a| a < 2.0);
    Ok(McMellin {
        estimate: MellinValue {
            s,
            value,
            method: MellinMethod::MonteCarlo,
            error_bound: if nonfinite_variance { f64::INFINITY } else { jackknife_se },
        },
        jackknife_se,
        tail_index,
        nonfinite_variance,
    })
}

/// Mean and jackknife standard error. For the mean the leave-one-out
/// estimates are `(S − yᵢ)/(n − 1)` and the jackknife variance reduces to
/// `s²/n`; it is computed from the pseudo-values anyway so the function
/// stays correct if the statistic changes.
pub fn jackknife_mean(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let sum: f64 = y.iter().sum();
    let mean = sum / n;
    if y.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let loo: Vec<f64> = y.iter().map(|v| (sum - v) / (n - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|t| (t - loo_mean).powi(2)).sum::<f64>();
    (mean, var.sqrt())
}

/// Sample mean of `log Z` with its standard error.
pub fn mc_log_moment(samples: &[f64]) -> Result<(f64, f64), StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    let logs: Vec<f64> = samples.iter().map(|z| z.ln()).collect();
    Ok(jackknife_mean(&logs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcfRow {
    pub lambda: f64,
    pub empirical: (f64, f64),
    pub target: (f64, f64),
    pub stderr: f64,
    /// `|empirical − target| / stderr`.
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcfReport {
    pub samples: usize,
    pub rows: Vec<EcfRow>,
    pub any_flagged: bool,
}

/// Compares `mean(e^{iλZ})` with `exp Ψ(λ)` and flags deviations above
/// 3 standard errors. Meant for ≥ 10⁴ unit-time samples.
pub fn ecf_check(samples: &[f64], law: &StableLaw, lambdas: &[f64]) -> EcfReport {
    let n = samples.len() as f64;
    let rows: Vec<EcfRow> = lambdas
        .iter()
        .map(|&lambda| {
            let (mut c, mut s, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
            for &z in samples {
                let (si, co) = (lambda * z).sin_cos();
                c += co;
                s += si;
                c2 += co * co;
                s2 += si * si;
            }
            let (mc, ms) = (c / n, s / n);
            let var = (c2 / n - mc * mc) + (s2 / n - ms * ms);
            let stderr = (var.max(0.0) / n).sqrt();
            let target = law.char_exponent(lambda).exp();
            let dev = (Complex64::new(mc, ms) - target).norm();
            let z = if stderr > 0.0 { dev / stderr } else if dev < 1e-12 { 0.0 } else { f64::INFINITY };
            EcfRow { lambda, empirical: (mc, ms), target: (target.re, target.im), stderr, z, flagged: z > 3.0 }
        })
        .collect();
    let any_flagged = rows.iter().any(|r| r.flagged);
    EcfReport { samples: samples.len(), rows, any_flagged }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival `P[K > x] = 2 Σ (−1)^{k−1} e^{−2k²x²}`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    // the alternating series converges slowly near 0, where P is 1 anyway
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value (and
/// the usual small-sample correction of the scaled statistic).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    KsResult { statistic: d, p_value: kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d) }
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let ne = n.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d) }
}

/// Writes fits as a JSON array.
pub fn write_fits_json(fits: &[TailFit], path: &Path) -> std::io::Result<()> {
    let mut w = open_writer(path)?;
    serde_json::to_writer_pretty(&mut w, fits)?;
    w.flush()
}
