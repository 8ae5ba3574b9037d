//! Simulation and verification laboratory for the stable Kolmogorov process
//! `Z = (X, L)`, where `L` is a strictly α-stable Lévy process and `X` its
//! running integral.
//!
//! * [`stable`]: laws, derived constants, exact increment sampling.
//! * [`path`]: discretized paths, zeros of `X`, winding angles, return samples.
//! * [`cascade`]: exact-in-law recursion for the half-winding times.
//! * [`theory`]: closed forms, tail-class algebra and quadrature evaluators.
//! * [`stats`]: survival curves, tail fits, Monte Carlo Mellin transforms.
//! * [`experiment`]: the reproducible experiment runner behind the `skw` binary.

pub mod cascade;
pub mod experiment;
pub mod io;
pub mod path;
pub mod quad;
pub mod rng;
pub mod stable;
pub mod stats;
pub mod theory;

pub use path::{DtPolicy, PathRecord, PlaneState, Region, ReturnSample};
pub use rng::StreamFamily;
pub use stable::{DerivedConstants, StableLaw};
