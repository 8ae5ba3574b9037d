//! Flat `key = value` configuration with defaults, file and flag layers.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::path::{DtPolicy, PlaneState, DEFAULT_RETURN_CAP};
use crate::stable::{ParamError, StableLaw};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Every knob of every experiment; each subcommand reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub rho: f64,
    pub x: f64,
    pub y: f64,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    /// Base of the natural-scale step policy.
    pub dt: f64,
    /// Return-time cap; longer excursions are censored.
    pub cap: f64,
    /// Uncensored returns per sign.
    pub pool: usize,
    pub cascades: usize,
    pub nmax: usize,
    /// Number of zeros for `theorem-b`.
    pub n: usize,
    /// Direct path simulations (`theorem-b`, `harmonic`).
    pub paths: usize,
    /// Mellin arguments.
    pub s: Vec<f64>,
    /// Unit-time draws for `validate-sampler`.
    pub samples: usize,
    pub lambdas: Vec<f64>,
    /// Tail exponents of the two factors in `lemma-tails`.
    pub nu: f64,
    pub mu: f64,
    /// Log powers of the two factors in `lemma-tails`.
    pub nu_logpow: u32,
    pub mu_logpow: u32,
    pub zlo: f64,
    pub zhi: f64,
    pub zpoints: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            rho: 0.5,
            x: -1.0,
            y: 0.0,
            seed: 2024,
            workers: 1,
            out: PathBuf::from("skw-out"),
            dt: 0.01,
            cap: DEFAULT_RETURN_CAP,
            pool: 10_000,
            cascades: 500,
            nmax: 100,
            n: 2,
            paths: 20_000,
            s: vec![0.5, 1.25],
            samples: 100_000,
            lambdas: vec![-1.0, 0.5, 1.0, 2.0],
            nu: 0.5,
            mu: 0.5,
            nu_logpow: 0,
            mu_logpow: 0,
            zlo: 1e6,
            zhi: 1e12,
            zpoints: 61,
        }
    }
}

fn parse_scalar(raw: &str) -> Value {
    let raw = raw.trim();
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        if v.is_number() || v.is_boolean() {
            return v;
        }
    }
    // scientific notation like `1e12` is fine for serde_json; `2.` is not
    match raw.parse::<f64>() {
        Ok(f) => serde_json::Number::from_f64(f).map_or(Value::String(raw.into()), Value::Number),
        Err(_) => Value::String(raw.trim_matches('"').into()),
    }
}

fn parse_value(key: &str, raw: &str) -> Value {
    // list-valued keys take comma-separated items
    if matches!(key, "s" | "lambdas") {
        Value::Array(raw.split(',').filter(|t| !t.trim().is_empty()).map(parse_scalar).collect())
    } else {
        parse_scalar(raw)
    }
}

impl ExperimentConfig {
    /// Applies `key = value` overrides on top of `self`.
    pub fn with_overrides<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, ConfigError> {
        let mut map = match serde_json::to_value(self).expect("config serializes") {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        for (key, raw) in pairs {
            let key = key.trim().replace('-', "_");
            if !map.contains_key(&key) {
                return Err(ConfigError::UnknownKey(key));
            }
            // integers given as `1e4` must become integers
            let mut v = parse_value(&key, raw);
            if map[&key].is_u64() {
                if let Some(f) = v.as_f64() {
                    if f >= 0.0 && f.fract() == 0.0 {
                        v = Value::from(f as u64);
                    }
                }
            }
            map.insert(key, v);
        }
        Self::from_map(map)
    }

    fn from_map(map: Map<String, Value>) -> Result<Self, ConfigError> {
        serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::BadValue {
            key: "config".into(),
            msg: e.to_string(),
        })
    }

    /// Parses the flat file format: `key = value` lines, `#` comments.
    pub fn parse_overrides(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    pub fn with_file(&self, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let pairs = Self::parse_overrides(&text)?;
        self.with_overrides(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// The config in its own file format; parsing it back gives `self`.
    pub fn to_text(&self) -> String {
        let map = match serde_json::to_value(self).expect("config serializes") {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        let mut s = String::new();
        for (k, v) in map {
            let rendered = match v {
                Value::Array(items) => items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
                Value::String(t) => t,
                other => other.to_string(),
            };
            s.push_str(&format!("{k} = {rendered}\n"));
        }
        s
    }

    pub fn law(&self) -> Result<StableLaw, ConfigError> {
        Ok(StableLaw::new(self.alpha, self.rho)?)
    }

    pub fn start(&self) -> PlaneState {
        PlaneState::new(self.x, self.y)
    }

    pub fn policy(&self) -> DtPolicy {
        DtPolicy::natural(self.dt)
    }

    /// Log-spaced grid from `zlo` to `zhi`.
    pub fn z_grid(&self) -> Vec<f64> {
        let (a, b) = (self.zlo.ln(), self.zhi.ln());
        let k = self.zpoints.max(2);
        (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
    }
}
