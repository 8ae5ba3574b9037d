//! Discretized paths of `Z = (X, L)` with `X_t = x + ∫₀ᵗ L_s ds`.
//!
//! Within a step `L` is frozen at its left value, so the simulated trajectory
//! is a staircase: a horizontal move `(x, y) → (x + y·dt, y)` followed by a
//! vertical segment for the jump of `L`. Both pieces are straight, which makes
//! the chord formula for the winding angle exact on the discretized path, and
//! the zero of `X` inside a horizontal move is known in closed form.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::open_writer;
use crate::stable::{StableLaw, StableSampler};

/// Which side of the vertical axis a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `{x < 0} ∪ {x = 0, y < 0}`
    PMinus,
    /// `{x > 0} ∪ {x = 0, y > 0}`
    PPlus,
    Origin,
}

impl Region {
    pub fn of(x: f64, y: f64) -> Region {
        if x < 0.0 || (x == 0.0 && y < 0.0) {
            Region::PMinus
        } else if x > 0.0 || (x == 0.0 && y > 0.0) {
            Region::PPlus
        } else {
            Region::Origin
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneState {
    pub x: f64,
    pub y: f64,
}

impl PlaneState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn region(&self) -> Region {
        Region::of(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("segment ({x0}, {y0}) -> ({x1}, {y1}) passes through the origin")]
pub struct SegmentThroughOrigin {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Signed angle swept by the straight segment `(x0, y0) → (x1, y1)` seen from
/// the origin, in `(−π, π)`.
pub fn winding_increment(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<f64, SegmentThroughOrigin> {
    let through = (x0 == 0.0 && y0 == 0.0)
        || (x1 == 0.0 && y1 == 0.0)
        || (x0 == 0.0 && x1 == 0.0 && y0 * y1 < 0.0)
        || (y0 == 0.0 && y1 == 0.0 && x0 * x1 < 0.0);
    if through {
        return Err(SegmentThroughOrigin { x0, y0, x1, y1 });
    }
    Ok((x0 * y1 - x1 * y0).atan2(x0 * x1 + y0 * y1))
}

/// Time and speed at which `X` crosses zero inside `[t0, t0 + dt]`.
///
/// Uses the frozen-slope root `x0 + l0·(t − t0) = 0` when it falls inside the
/// step, otherwise the chord between the two grid values. The speed is `L`
/// linearly interpolated at the crossing.
pub fn refine_crossing(x0: f64, l0: f64, x1: f64, l1: f64, t0: f64, dt: f64) -> (f64, f64) {
    let frozen = if l0 != 0.0 { Some(t0 - x0 / l0) } else { None };
    let t_star = match frozen {
        Some(t) if t > t0 && t < t0 + dt => t,
        _ if x1 != x0 => t0 + dt * x0 / (x0 - x1),
        _ => t0 + 0.5 * dt,
    };
    let speed = l0 + (l1 - l0) * (t_star - t0) / dt;
    (t_star, speed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepScaling {
    /// `dt₀` in absolute time units.
    Fixed,
    /// `dt₀` times the local self-similar time scale
    /// `max(|y|^α, |x|^{α/(1+α)})`, so the step count grows only
    /// logarithmically with the horizon.
    Natural,
}

/// Step-size rule.
///
/// The proposed step is halved while the frozen-slope move would reach the
/// vertical axis (`x·y < 0` and `|x| < |y|·dt`) or sweep more than
/// `angle_cap`, down to `2^{-max_halvings}` of the proposal. At the floor the
/// step is taken as is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtPolicy {
    pub base: f64,
    pub scaling: StepScaling,
    pub adaptive: bool,
    pub max_halvings: u32,
    pub angle_cap: f64,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self::natural(0.01)
    }
}

impl DtPolicy {
    pub fn natural(base: f64) -> Self {
        Self { base, scaling: StepScaling::Natural, adaptive: true, max_halvings: 20, angle_cap: PI / 8.0 }
    }

    pub fn fixed(base: f64) -> Self {
        Self { base, scaling: StepScaling::Fixed, adaptive: true, max_halvings: 20, angle_cap: PI / 8.0 }
    }

    /// Plain Euler grid with no halving.
    pub fn uniform(base: f64) -> Self {
        Self { adaptive: false, ..Self::fixed(base) }
    }

    pub fn halved(&self) -> Self {
        Self { base: 0.5 * self.base, ..*self }
    }

    /// Returns `(dt, floor)` for a step starting at `(x, y)`.
    fn propose(&self, alpha: f64, x: f64, y: f64) -> (f64, f64) {
        let proposal = match self.scaling {
            StepScaling::Fixed => self.base,
            StepScaling::Natural => {
                let scale = y.abs().powf(alpha).max(x.abs().powf(alpha / (1.0 + alpha)));
                self.base * scale
            }
        };
        let floor = proposal * 0.5f64.powi(self.max_halvings as i32);
        if !self.adaptive {
            return (proposal, floor);
        }
        let mut dt = proposal;
        while 0.5 * dt >= floor {
            let crossing = x * y < 0.0 && x.abs() < y.abs() * dt;
            let sweep = || winding_increment(x, y, x + y * dt, y).map(f64::abs).unwrap_or(0.0);
            if !(crossing || sweep() > self.angle_cap) {
                break;
            }
            dt *= 0.5;
        }
        (dt, floor)
    }
}

/// Supplies the jump of `L` over a step of length `dt`.
pub trait IncrementSource {
    fn increment(&mut self, dt: f64) -> Option<f64>;
}

/// Exact draws from the stable law.
pub struct Sampled<'a, R: Rng + ?Sized> {
    sampler: StableSampler,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> Sampled<'a, R> {
    pub fn new(law: StableLaw, rng: &'a mut R) -> Self {
        Self { sampler: law.sampler(), rng }
    }
}

impl<R: Rng + ?Sized> IncrementSource for Sampled<'_, R> {
    fn increment(&mut self, dt: f64) -> Option<f64> {
        Some(self.sampler.sample_increment(dt, self.rng))
    }
}

/// Caller-supplied increments, consumed one per step regardless of `dt`.
pub struct Injected<I>(pub I);

impl<I: Iterator<Item = f64>> IncrementSource for Injected<I> {
    fn increment(&mut self, _dt: f64) -> Option<f64> {
        self.0.next()
    }
}

/// One grid node: time, `X`, `L` just before the node and `L` at the node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub t: f64,
    pub x: f64,
    pub l_pre: f64,
    pub l: f64,
}

/// A zero of `X`, i.e. a half-winding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub n: usize,
    pub time: f64,
    pub speed: f64,
    pub sign: i8,
    /// Winding angle at the hit.
    pub omega: f64,
    /// Length of the step containing the hit.
    pub step: f64,
    /// Accumulated `Σ dt·|ΔL|` up to the hit.
    pub x_error: f64,
}

impl HitRecord {
    /// Time resolution of this hit: the step length plus the accumulated
    /// position error converted to time at the crossing speed.
    pub fn time_tolerance(&self) -> f64 {
        self.step + self.x_error / self.speed.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recording {
    /// Every grid node with its winding angle.
    Full,
    /// Start and end nodes only; hits are always kept.
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Horizon,
    MaxHits,
    IncrementsExhausted,
    StepUnderflow,
    SegmentThroughOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub horizon: f64,
    pub policy: DtPolicy,
    pub recording: Recording,
    pub max_hits: Option<usize>,
}

impl SimOptions {
    pub fn new(horizon: f64, policy: DtPolicy) -> Self {
        Self { horizon, policy, recording: Recording::Full, max_hits: None }
    }

    pub fn endpoints(mut self) -> Self {
        self.recording = Recording::Endpoints;
        self
    }

    pub fn max_hits(mut self, n: usize) -> Self {
        self.max_hits = Some(n);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub law: StableLaw,
    pub start: PlaneState,
    pub grid: Vec<GridNode>,
    pub omega: Vec<f64>,
    pub hits: Vec<HitRecord>,
    pub policy: DtPolicy,
    pub seed: Option<u64>,
    pub steps: usize,
    pub x_error: f64,
    pub termination: Termination,
}

impl PathRecord {
    pub fn end(&self) -> &GridNode {
        self.grid.last().expect("grid holds at least the start node")
    }

    pub fn end_time(&self) -> f64 {
        self.end().t
    }

    pub fn final_omega(&self) -> f64 {
        *self.omega.last().expect("omega is aligned with the grid")
    }

    /// Angle swept until the first hit, in `[−π, 0)` for starts in `P₋`.
    pub fn theta0(&self) -> Option<f64> {
        self.hits.first().map(|h| h.omega)
    }

    /// `N(t) = #{n : T₀⁽ⁿ⁾ ≤ t}`.
    pub fn hits_before(&self, t: f64) -> usize {
        self.hits.partition_point(|h| h.time <= t)
    }

    /// Writes `t,X,L,omega` rows (gzip when the name ends in `.gz`).
    pub fn write_grid_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(open_writer(path)?);
        w.write_record(["t", "X", "L", "omega"])?;
        for (node, om) in self.grid.iter().zip(&self.omega) {
            w.serialize((node.t, node.x, node.l, om))?;
        }
        w.into_inner().map_err(|e| e.into_error())?.flush()
    }

    /// Writes `n,time,speed` rows (gzip when the name ends in `.gz`).
    pub fn write_hits_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(open_writer(path)?);
        w.write_record(["n", "time", "speed"])?;
        for h in &self.hits {
            w.serialize((h.n, h.time, h.speed))?;
        }
        w.into_inner().map_err(|e| e.into_error())?.flush()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("start point is the origin")]
    StartAtOrigin,
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("step size underflow at t = {time}: path truncated")]
    StepUnderflow { time: f64, partial: Box<PathRecord> },
    #[error("jump through the origin at t = {time}: path truncated")]
    SegmentThroughOrigin { time: f64, partial: Box<PathRecord> },
}

impl PathError {
    pub fn partial(&self) -> Option<&PathRecord> {
        match self {
            PathError::StepUnderflow { partial, .. } | PathError::SegmentThroughOrigin { partial, .. } => {
                Some(partial)
            }
            _ => None,
        }
    }
}

/// Simulates `(X, L)` from `start` over `[0, horizon]`, or until `max_hits`
/// zeros of `X` have been recorded.
pub fn simulate_path<S: IncrementSource + ?Sized>(
    law: &StableLaw,
    start: PlaneState,
    opts: &SimOptions,
    source: &mut S,
) -> Result<PathRecord, PathError> {
    if start.region() == Region::Origin {
        return Err(PathError::StartAtOrigin);
    }
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(PathError::InvalidHorizon(opts.horizon));
    }
    let alpha = law.alpha();
    let policy = opts.policy;
    let full = opts.recording == Recording::Full;

    let mut t = 0.0;
    let (mut x, mut y) = (start.x, start.y);
    let mut l_pre = start.y;
    let mut omega = 0.0;
    let mut x_error = 0.0;
    let mut steps = 0usize;
    let mut record = PathRecord {
        law: *law,
        start,
        grid: vec![GridNode { t, x, l_pre: y, l: y }],
        omega: vec![0.0],
        hits: Vec::new(),
        policy,
        seed: None,
        steps: 0,
        x_error: 0.0,
        termination: Termination::Horizon,
    };

    let finish = |mut record: PathRecord, node: GridNode, omega: f64, steps, x_error, term| {
        if record.grid.last() != Some(&node) {
            record.grid.push(node);
            record.omega.push(omega);
        }
        record.steps = steps;
        record.x_error = x_error;
        record.termination = term;
        record
    };

    loop {
        if t >= opts.horizon {
            let node = GridNode { t, x, l_pre, l: y };
            return Ok(finish(record, node, omega, steps, x_error, Termination::Horizon));
        }
        let (mut dt, _floor) = policy.propose(alpha, x, y);
        let remaining = opts.horizon - t;
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let t_next = if last { opts.horizon } else { t + dt };
        if !(dt > 0.0) || t_next <= t {
            let node = GridNode { t, x, l_pre, l: y };
            let partial = finish(record, node, omega, steps, x_error, Termination::StepUnderflow);
            return Err(PathError::StepUnderflow { time: t, partial: Box::new(partial) });
        }

        // horizontal move with L frozen
        let x_next = x + y * dt;
        let before = Region::of(x, y);
        let after = Region::of(x_next, y);
        if before != after {
            let (t_star, speed) = if x_next == 0.0 {
                (t_next, y)
            } else {
                refine_crossing(x, y, x_next, y, t, dt)
            };
            let sweep = winding_increment(x, y, 0.0, y).expect("y != 0 when X moves");
            record.hits.push(HitRecord {
                n: record.hits.len() + 1,
                time: t_star,
                speed,
                sign: if speed > 0.0 { 1 } else { -1 },
                omega: omega + sweep,
                step: dt,
                x_error,
            });
        }
        let horiz = winding_increment(x, y, x_next, y).unwrap_or(0.0);

        let Some(jump) = source.increment(dt) else {
            let node = GridNode { t, x, l_pre, l: y };
            return Ok(finish(record, node, omega, steps, x_error, Termination::IncrementsExhausted));
        };
        let y_next = y + jump;
        let vert = match winding_increment(x_next, y, x_next, y_next) {
            Ok(v) => v,
            Err(_) => {
                let node = GridNode { t, x, l_pre, l: y };
                let partial = finish(record, node, omega, steps, x_error, Termination::SegmentThroughOrigin);
                return Err(PathError::SegmentThroughOrigin { time: t_next, partial: Box::new(partial) });
            }
        };

        steps += 1;
        x_error += dt * jump.abs();
        omega += horiz + vert;
        t = t_next;
        l_pre = y;
        x = x_next;
        y = y_next;
        if full {
            record.grid.push(GridNode { t, x, l_pre, l: y });
            record.omega.push(omega);
        }
        if let Some(max) = opts.max_hits {
            if record.hits.len() >= max {
                let node = GridNode { t, x, l_pre, l: y };
                return Ok(finish(record, node, omega, steps, x_error, Termination::MaxHits));
            }
        }
    }
}

/// One draw of `(T₀, |L_{T₀}|)`, possibly censored at the horizon cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    /// `−1` for starts in `P₋` (in particular `(0, −1)`), `+1` for `P₊`.
    pub start_sign: i8,
    pub tau: f64,
    /// `None` when censored.
    pub ell: Option<f64>,
}

impl ReturnSample {
    pub fn new(start_sign: i8, tau: f64, ell: f64) -> Self {
        Self { start_sign, tau, ell: Some(ell) }
    }

    pub fn censored(start_sign: i8, horizon: f64) -> Self {
        Self { start_sign, tau: horizon, ell: None }
    }

    pub fn is_censored(&self) -> bool {
        self.ell.is_none()
    }
}

/// Default cap on the return time; the tail of `τ` is `t^{-θ}` with `θ < 1`, so
/// the cap must be many decades above the typical return time.
pub const DEFAULT_RETURN_CAP: f64 = 1e20;

/// First return of `X` to zero from a general start.
pub fn first_return<S: IncrementSource + ?Sized>(
    law: &StableLaw,
    start: PlaneState,
    policy: &DtPolicy,
    horizon_cap: f64,
    source: &mut S,
) -> Result<ReturnSample, PathError> {
    let start_sign = match start.region() {
        Region::PMinus => -1,
        Region::PPlus => 1,
        Region::Origin => return Err(PathError::StartAtOrigin),
    };
    let opts = SimOptions::new(horizon_cap, *policy).endpoints().max_hits(1);
    let path = simulate_path(law, start, &opts, source)?;
    Ok(match path.hits.first() {
        Some(h) => ReturnSample::new(start_sign, h.time, h.speed.abs()),
        None => ReturnSample::censored(start_sign, path.end_time()),
    })
}

/// `(τ±, ℓ±)`: first return from `(0, ±1)`.
pub fn sample_return<R: Rng + ?Sized>(
    law: &StableLaw,
    start_sign: i8,
    policy: &DtPolicy,
    horizon_cap: f64,
    rng: &mut R,
) -> Result<ReturnSample, PathError> {
    let start = PlaneState::new(0.0, if start_sign < 0 { -1.0 } else { 1.0 });
    first_return(law, start, policy, horizon_cap, &mut Sampled::new(*law, rng))
}
