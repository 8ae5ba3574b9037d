//! Reproducible experiments: configuration, execution and reports.
//!
//! Every run writes `summary.json` (resolved config, code version, results
//! and the pass/fail of each assertion), `config.txt`, CSV data and a
//! `plots.json` manifest under the output directory.

mod cli;
mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub use cli::{main_with_args, Cli};
pub use config::{ConfigError, ExperimentConfig};

use crate::cascade::CascadeError;
use crate::io::open_writer;
use crate::path::PathError;
use crate::stats::StatsError;
use crate::theory::TheoryError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    ValidateSampler,
    SampleReturns,
    TheoremA,
    TheoremB,
    Harmonic,
    LemmaTails,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::ValidateSampler => "validate-sampler",
            Command::SampleReturns => "sample-returns",
            Command::TheoremA => "theorem-a",
            Command::TheoremB => "theorem-b",
            Command::Harmonic => "harmonic",
            Command::LemmaTails => "lemma-tails",
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("path simulation: {0}")]
    Path(#[from] PathError),
    #[error("cascade: {0}")]
    Cascade(#[from] CascadeError),
    #[error("theory: {0}")]
    Theory(#[from] TheoryError),
    #[error("statistics: {0}")]
    Stats(#[from] StatsError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

/// One checked statement.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Assertion {
    /// `|value − target| ≤ tolerance`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let passed = (value - target).abs() <= tolerance;
        Self { name: name.into(), passed, value, target, tolerance, detail: String::new() }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value: f64::NAN,
            target: f64::NAN,
            tolerance: f64::NAN,
            detail: detail.into(),
        }
    }

    pub fn note(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// A plotted series: file, axes and the theory curve to overlay.
#[derive(Debug, Clone, Serialize)]
pub struct PlotSeries {
    pub file: String,
    pub x: String,
    pub y: String,
    pub log_x: bool,
    pub log_y: bool,
    pub overlay: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Command,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    #[serde(skip)]
    pub plots: Vec<PlotSeries>,
}

impl Report {
    fn new(command: Command, config: &ExperimentConfig) -> Self {
        Self {
            command,
            version: VERSION,
            config: config.clone(),
            results: Value::Object(Default::default()),
            assertions: Vec::new(),
            passed: true,
            plots: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("result serializes");
        self.results.as_object_mut().expect("results object").insert(key.into(), v);
    }

    fn check(&mut self, a: Assertion) {
        self.passed &= a.passed;
        self.assertions.push(a);
    }

    fn plot(&mut self, file: &str, x: &str, y: &str, log: (bool, bool), overlay: Option<&str>) {
        self.plots.push(PlotSeries {
            file: file.into(),
            x: x.into(),
            y: y.into(),
            log_x: log.0,
            log_y: log.1,
            overlay: overlay.map(Into::into),
        });
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// Writes `summary.json`, `config.txt` and `plots.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ExperimentError::Io { path, source }
        };
        let summary = dir.join("summary.json");
        let mut w = open_writer(&summary).map_err(io(&summary))?;
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| ExperimentError::Io {
            path: summary.clone(),
            source: e.into(),
        })?;
        writeln!(w).and_then(|_| w.flush()).map_err(io(&summary))?;

        let cfg = dir.join("config.txt");
        std::fs::write(&cfg, self.config.to_text()).map_err(io(&cfg))?;

        let plots = dir.join("plots.json");
        let manifest = serde_json::json!({ "command": self.command, "series": self.plots });
        std::fs::write(&plots, serde_json::to_string_pretty(&manifest).expect("manifest") + "\n").map_err(io(&plots))?;
        Ok(())
    }
}

/// Runs one experiment on a worker pool of `config.workers` threads and
/// writes its report files.
pub fn run_experiment(command: Command, config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let out = config.out.clone();
    std::fs::create_dir_all(&out).map_err(|source| ExperimentError::Io { path: out.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Invalid(e.to_string()))?;
    let report = pool.install(|| commands::dispatch(command, config))?;
    report.write(&out)?;
    Ok(report)
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}
