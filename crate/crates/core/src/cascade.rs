//! The multiplicative recursion for `(T₀⁽ⁿ⁾, |L_{T₀⁽ⁿ⁾}|)`.
//!
//! By the strong Markov property at the n-th zero of `X` and the scaling
//! `(X_t, L_t) ↦ (c^{1+1/α} X_{t/c}, c^{1/α} L_{t/c})`, a fresh excursion
//! from `(0, ±v)` is an excursion from `(0, ±1)` with time scaled by `v^α`
//! and speed scaled by `v`:
//!
//! ```text
//! T⁽ⁿ⁺¹⁾ = T⁽ⁿ⁾ + |L⁽ⁿ⁾|^α τ±,   |L⁽ⁿ⁺¹⁾| = |L⁽ⁿ⁾| ℓ±.
//! ```
//!
//! Everything is kept in logs; `T⁽ⁿ⁾` grows like `e^{κn}`.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{open_reader, open_writer};
use crate::path::{sample_return, DtPolicy, PathError, ReturnSample};
use crate::rng::{Stream, StreamFamily};
use crate::stable::StableLaw;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error("draw from the {got:+} pool where the {want:+} pool was due")]
    ParityMismatch { want: i8, got: i8 },
    #[error("censored draws cannot extend a cascade")]
    CensoredDraw,
    #[error("return speed {0} is not positive")]
    ZeroSpeed(f64),
    #[error("the {0:+} pool is empty")]
    EmptyPool(i8),
    #[error("need at least {need} cascades, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("cascades stop at different depths")]
    RaggedCascades,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("pool file: {0}")]
    Io(String),
}

/// State after the n-th zero of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeState {
    pub n: usize,
    pub log_t: f64,
    pub log_l: f64,
    /// Sign of the pool that feeds the next step: after a crossing from
    /// `P₋` the process sits at `(0, +|L|)`, so `+1` follows `−1`.
    pub next_sign: i8,
}

impl CascadeState {
    /// The state at `n = 1` given the first return from a start of sign
    /// `start.start_sign`.
    pub fn from_start(start: &ReturnSample) -> Result<Self, CascadeError> {
        let ell = start.ell.ok_or(CascadeError::CensoredDraw)?;
        if !(ell > 0.0) {
            return Err(CascadeError::ZeroSpeed(ell));
        }
        Ok(Self { n: 1, log_t: start.tau.ln(), log_l: ell.ln(), next_sign: -start.start_sign.signum() })
    }
}

fn logsumexp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn cascade_step(law: &StableLaw, state: &CascadeState, draw: &ReturnSample) -> Result<CascadeState, CascadeError> {
    if draw.start_sign.signum() != state.next_sign {
        return Err(CascadeError::ParityMismatch { want: state.next_sign, got: draw.start_sign });
    }
    let ell = draw.ell.ok_or(CascadeError::CensoredDraw)?;
    if !(ell > 0.0) {
        return Err(CascadeError::ZeroSpeed(ell));
    }
    Ok(CascadeState {
        n: state.n + 1,
        log_t: logsumexp(state.log_t, law.alpha() * state.log_l + draw.tau.ln()),
        log_l: state.log_l + ell.ln(),
        next_sign: -state.next_sign,
    })
}

/// Samples of `(τ±, ℓ±)` from one starting sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPool {
    pub sign: i8,
    /// Uncensored draws only.
    pub samples: Vec<ReturnSample>,
    pub censored_count: usize,
}

impl ReturnPool {
    pub fn from_samples(sign: i8, all: impl IntoIterator<Item = ReturnSample>) -> Self {
        let mut samples = Vec::new();
        let mut censored_count = 0;
        for s in all {
            if s.is_censored() {
                censored_count += 1;
            } else {
                samples.push(s);
            }
        }
        Self { sign, samples, censored_count }
    }

    /// Simulates returns until `size` of them are uncensored. Draw `i` uses
    /// stream `i` of `family`, so the pool does not depend on the worker
    /// count.
    pub fn simulate(
        law: &StableLaw,
        sign: i8,
        size: usize,
        policy: &DtPolicy,
        cap: f64,
        family: &StreamFamily,
    ) -> Result<Self, CascadeError> {
        let mut pool = ReturnPool { sign, samples: Vec::with_capacity(size), censored_count: 0 };
        let mut next = 0u64;
        while pool.samples.len() < size {
            let batch = (size - pool.samples.len()) as u64;
            let draws: Result<Vec<_>, PathError> = (next..next + batch)
                .into_par_iter()
                .map(|i| sample_return(law, sign, policy, cap, &mut family.stream(i)))
                .collect();
            next += batch;
            for d in draws? {
                if d.is_censored() {
                    pool.censored_count += 1;
                } else {
                    pool.samples.push(d);
                }
            }
        }
        Ok(pool)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn censored_fraction(&self) -> f64 {
        let total = self.samples.len() + self.censored_count;
        if total == 0 {
            0.0
        } else {
            self.censored_count as f64 / total as f64
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    pub fn ells(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.ell).collect()
    }

    /// `sign,tau,ell,censored` rows. Only the number of censored draws is
    /// kept, so their rows have `tau = NaN` and an empty `ell`.
    pub fn write_csv(&self, path: &Path) -> Result<(), CascadeError> {
        let io = |e: csv::Error| CascadeError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(open_writer(path).map_err(|e| CascadeError::Io(e.to_string()))?);
        w.write_record(["sign", "tau", "ell", "censored"]).map_err(io)?;
        for s in &self.samples {
            w.serialize((s.start_sign, s.tau, s.ell, false)).map_err(io)?;
        }
        for _ in 0..self.censored_count {
            w.serialize((self.sign, f64::NAN, None::<f64>, true)).map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| CascadeError::Io(e.to_string()))?
            .flush()
            .map_err(|e| CascadeError::Io(e.to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self, CascadeError> {
        let io = |e: csv::Error| CascadeError::Io(e.to_string());
        let mut r = csv::Reader::from_reader(open_reader(path).map_err(|e| CascadeError::Io(e.to_string()))?);
        let mut sign = None;
        let mut rows = Vec::new();
        for rec in r.deserialize::<(i8, f64, Option<f64>, bool)>() {
            let (s, tau, ell, censored) = rec.map_err(io)?;
            if *sign.get_or_insert(s) != s {
                return Err(CascadeError::Io("mixed signs in one pool".into()));
            }
            rows.push(match (censored, ell) {
                (false, Some(l)) => ReturnSample::new(s, tau, l),
                _ => ReturnSample::censored(s, tau),
            });
        }
        let sign = sign.ok_or_else(|| CascadeError::Io("empty pool file".into()))?;
        Ok(Self::from_samples(sign, rows))
    }
}

/// Where cascade steps get their `(τ±, ℓ±)`.
pub trait DrawSource: Sync {
    fn draw(&self, sign: i8, rng: &mut Stream) -> Result<ReturnSample, CascadeError>;
}

/// Bootstrap: uniform resampling with replacement from two pools.
#[derive(Debug, Clone, Copy)]
pub struct Pools<'a> {
    pub minus: &'a ReturnPool,
    pub plus: &'a ReturnPool,
}

impl<'a> Pools<'a> {
    pub fn new(minus: &'a ReturnPool, plus: &'a ReturnPool) -> Result<Self, CascadeError> {
        for p in [minus, plus] {
            if p.is_empty() {
                return Err(CascadeError::EmptyPool(p.sign));
            }
        }
        Ok(Self { minus, plus })
    }
}

impl DrawSource for Pools<'_> {
    fn draw(&self, sign: i8, rng: &mut Stream) -> Result<ReturnSample, CascadeError> {
        let pool = if sign < 0 { self.minus } else { self.plus };
        Ok(pool.samples[rng.gen_range(0..pool.samples.len())])
    }
}

/// Fresh path simulation for every step; censored draws are redrawn.
#[derive(Debug, Clone, Copy)]
pub struct Live {
    pub law: StableLaw,
    pub policy: DtPolicy,
    pub cap: f64,
}

impl DrawSource for Live {
    fn draw(&self, sign: i8, rng: &mut Stream) -> Result<ReturnSample, CascadeError> {
        loop {
            let s = sample_return(&self.law, sign, &self.policy, self.cap, rng)?;
            if !s.is_censored() {
                return Ok(s);
            }
        }
    }
}

/// States for `n = 1..=n_max`, the first one being `start`.
pub fn run_cascade<D: DrawSource + ?Sized>(
    law: &StableLaw,
    source: &D,
    start: &ReturnSample,
    n_max: usize,
    rng: &mut Stream,
) -> Result<Vec<CascadeState>, CascadeError> {
    let mut state = CascadeState::from_start(start)?;
    let mut out = Vec::with_capacity(n_max);
    out.push(state);
    for _ in 1..n_max {
        let draw = source.draw(state.next_sign, rng)?;
        state = cascade_step(law, &state, &draw)?;
        out.push(state);
    }
    Ok(out)
}

/// `count` independent cascades, cascade `i` on stream `i` of `family`.
/// The start of each cascade is drawn from the `start_sign` pool through
/// `source` as well.
pub fn run_cascades<D: DrawSource + ?Sized>(
    law: &StableLaw,
    source: &D,
    start_sign: i8,
    n_max: usize,
    count: usize,
    family: &StreamFamily,
) -> Result<Vec<Vec<CascadeState>>, CascadeError> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = family.stream(i);
            let start = source.draw(start_sign, &mut rng)?;
            run_cascade(law, source, &start, n_max, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa_hat: f64,
    pub stderr: f64,
    pub velocity_hat: f64,
    /// Delta-method error of `velocity_hat = −π/kappa_hat`.
    pub velocity_stderr: f64,
    pub n_max: usize,
    pub cascades: usize,
}

pub const MIN_CASCADES: usize = 30;

/// Mean of `log T⁽ⁿ⁾/n` at the final depth across cascades.
pub fn estimate_kappa(cascades: &[Vec<CascadeState>]) -> Result<KappaEstimate, CascadeError> {
    if cascades.len() < MIN_CASCADES {
        return Err(CascadeError::InsufficientData { need: MIN_CASCADES, got: cascades.len() });
    }
    let n_max = cascades[0].last().map_or(0, |s| s.n);
    if n_max == 0 || cascades.iter().any(|c| c.last().map_or(0, |s| s.n) != n_max) {
        return Err(CascadeError::RaggedCascades);
    }
    let rates: Vec<f64> = cascades.iter().map(|c| c.last().unwrap().log_t / n_max as f64).collect();
    let (mean, se) = mean_and_stderr(&rates);
    let velocity_hat = -std::f64::consts::PI / mean;
    Ok(KappaEstimate {
        kappa_hat: mean,
        stderr: se,
        velocity_hat,
        velocity_stderr: velocity_hat.abs() * se / mean,
        n_max,
        cascades: cascades.len(),
    })
}

pub(crate) fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Values of `log T⁽ⁿ⁾` (or `log L⁽ⁿ⁾` with `speed = true`) at depth `n`.
pub fn column_at(cascades: &[Vec<CascadeState>], n: usize, speed: bool) -> Vec<f64> {
    cascades
        .iter()
        .filter_map(|c| c.get(n.checked_sub(1)?))
        .map(|s| if speed { s.log_l } else { s.log_t })
        .collect()
}

/// `cascade_id,n,logT,logL` rows.
pub fn write_cascades_csv(cascades: &[Vec<CascadeState>], path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(open_writer(path)?);
    w.write_record(["cascade_id", "n", "logT", "logL"])?;
    for (id, c) in cascades.iter().enumerate() {
        for s in c {
            w.serialize((id, s.n, s.log_t, s.log_l))?;
        }
    }
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bm() -> StableLaw {
        StableLaw::new(2.0, 0.5).unwrap()
    }

    struct Constant {
        tau: f64,
        ell: f64,
    }

    impl DrawSource for Constant {
        fn draw(&self, sign: i8, _: &mut Stream) -> Result<ReturnSample, CascadeError> {
            Ok(ReturnSample::new(sign, self.tau, self.ell))
        }
    }

    #[test]
    fn unit_draw() {
        let s = CascadeState { n: 1, log_t: 0.0, log_l: 0.0, next_sign: 1 };
        let t = cascade_step(&bm(), &s, &ReturnSample::new(1, 1.0, 1.0)).unwrap();
        assert_relative_eq!(t.log_t, 2f64.ln(), epsilon = 1e-15);
        assert_eq!((t.n, t.log_l, t.next_sign), (2, 0.0, -1));
    }

    #[test]
    fn step_errors() {
        let s = CascadeState { n: 1, log_t: 0.0, log_l: 0.0, next_sign: 1 };
        assert!(matches!(
            cascade_step(&bm(), &s, &ReturnSample::new(-1, 1.0, 1.0)),
            Err(CascadeError::ParityMismatch { .. })
        ));
        assert!(matches!(cascade_step(&bm(), &s, &ReturnSample::censored(1, 1e12)), Err(CascadeError::CensoredDraw)));
        assert!(matches!(cascade_step(&bm(), &s, &ReturnSample::new(1, 1.0, 0.0)), Err(CascadeError::ZeroSpeed(_))));
    }

    #[test]
    fn n_max_one_echoes_start() {
        let start = ReturnSample::new(-1, 3.0, 0.5);
        let src = Constant { tau: 1.0, ell: 1.0 };
        let out = run_cascade(&bm(), &src, &start, 1, &mut StreamFamily::new(0).stream(0)).unwrap();
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out[0].log_t, 3f64.ln());
        assert_relative_eq!(out[0].log_l, 0.5f64.ln());
        assert_eq!(out[0].next_sign, 1);
    }

    #[test]
    fn deterministic_rate() {
        // τ = 1, ℓ = e^{c/α}: T⁽ⁿ⁾ = (e^{cn} − 1)/(e^c − 1)
        let c: f64 = 1.7;
        let src = Constant { tau: 1.0, ell: (c / 2.0).exp() };
        let fam = StreamFamily::new(1);
        let runs = run_cascades(&bm(), &src, -1, 1000, 40, &fam).unwrap();
        let k = estimate_kappa(&runs).unwrap();
        let exact = (1000.0 * c - (c.exp() - 1.0).ln()) / 1000.0;
        assert_relative_eq!(k.kappa_hat, exact, epsilon = 1e-12);
        assert!((k.kappa_hat - c).abs() < 2e-3);
        assert!(k.stderr < 1e-12);
        assert_relative_eq!(k.velocity_hat, -std::f64::consts::PI / k.kappa_hat);

        // with unit speeds only the time draws accumulate: T⁽ⁿ⁾ = n e^c
        let src = Constant { tau: c.exp(), ell: 1.0 };
        let runs = run_cascades(&bm(), &src, -1, 1000, 40, &fam).unwrap();
        let k = estimate_kappa(&runs).unwrap();
        assert_relative_eq!(k.kappa_hat, (c + 1000f64.ln()) / 1000.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_domain_agrees() {
        let law = StableLaw::new(1.5, 0.5).unwrap();
        let minus = ReturnPool::from_samples(-1, (0..50).map(|i| ReturnSample::new(-1, 0.1 + i as f64, 0.5 + 0.05 * i as f64)));
        let plus = ReturnPool::from_samples(1, (0..50).map(|i| ReturnSample::new(1, 2.0 + 0.3 * i as f64, 0.2 + 0.07 * i as f64)));
        let pools = Pools::new(&minus, &plus).unwrap();
        let mut rng = StreamFamily::new(5).stream(0);
        let start = ReturnSample::new(-1, 0.7, 1.3);
        let states = run_cascade(&law, &pools, &start, 20, &mut rng).unwrap();
        // replay the same draws in linear scale
        let mut rng = StreamFamily::new(5).stream(0);
        let (mut t, mut l, mut sign) = (0.7f64, 1.3f64, 1i8);
        for s in &states[1..] {
            let d = pools.draw(sign, &mut rng).unwrap();
            t += l.powf(1.5) * d.tau;
            l *= d.ell.unwrap();
            sign = -sign;
            assert!((s.log_t.exp() - t).abs() <= 1e-10 * t);
            assert!((s.log_l.exp() - l).abs() <= 1e-10 * l);
        }
    }

    #[test]
    fn log_t_increases() {
        let minus = ReturnPool::from_samples(-1, [ReturnSample::new(-1, 1e-3, 0.5), ReturnSample::new(-1, 5.0, 3.0)]);
        let plus = ReturnPool::from_samples(
            1,
            [ReturnSample::new(1, 2.0, 0.8), ReturnSample::new(1, 0.1, 2.0), ReturnSample::censored(1, 1e12)],
        );
        assert_eq!(plus.censored_count, 1);
        let pools = Pools::new(&minus, &plus).unwrap();
        let runs = run_cascades(&bm(), &pools, -1, 30, 30, &StreamFamily::new(2)).unwrap();
        for c in &runs {
            for w in c.windows(2) {
                assert!(w[1].log_t > w[0].log_t);
                assert_eq!(w[1].next_sign, -w[0].next_sign);
            }
        }
    }

    #[test]
    fn empty_and_short_inputs() {
        let empty = ReturnPool::from_samples(1, []);
        let one = ReturnPool::from_samples(-1, [ReturnSample::new(-1, 1.0, 1.0)]);
        assert!(matches!(Pools::new(&one, &empty), Err(CascadeError::EmptyPool(1))));
        let few = vec![vec![CascadeState { n: 10, log_t: 1.0, log_l: 0.0, next_sign: 1 }]; 29];
        assert!(matches!(estimate_kappa(&few), Err(CascadeError::InsufficientData { .. })));
    }

    #[test]
    fn pool_csv_round_trip() {
        let pool = ReturnPool::from_samples(
            -1,
            [ReturnSample::new(-1, 1.5, 0.25), ReturnSample::censored(-1, 1e12), ReturnSample::new(-1, 1e9, 7.0)],
        );
        let dir = tempfile::tempdir().unwrap();
        for name in ["pool.csv", "pool.csv.gz"] {
            let p = dir.path().join(name);
            pool.write_csv(&p).unwrap();
            assert_eq!(ReturnPool::read_csv(&p).unwrap().samples, pool.samples);
            assert_eq!(ReturnPool::read_csv(&p).unwrap().censored_count, 1);
        }
    }

    #[test]
    fn simulated_pool_is_worker_independent() {
        let fam = StreamFamily::new(9).domain("pool");
        let policy = DtPolicy::natural(0.05);
        let a = ReturnPool::simulate(&bm(), -1, 64, &policy, 1e8, &fam).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| ReturnPool::simulate(&bm(), -1, 64, &policy, 1e8, &fam).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
