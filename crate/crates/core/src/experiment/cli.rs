use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{run_experiment, Command, ExperimentConfig, ExperimentError};

#[derive(Debug, Parser)]
#[command(name = "skw", version, about = "Windings of the stable Kolmogorov process")]
pub struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Closed-form constants and tail-class predictions of a law.
    Constants,
    /// Characteristic function, positivity and scaling of the increment sampler.
    ValidateSampler,
    /// Pools of first returns from (0, ±1) with log-moment and Mellin checks.
    SampleReturns,
    /// Winding velocity from cascades over return pools.
    TheoremA,
    /// Tail exponents of the n-th zero of X.
    TheoremB,
    /// Mellin transform of the harmonic measure: closed form, quadrature, Monte Carlo.
    Harmonic,
    /// Tails of products of independent heavy-tailed variables.
    LemmaTails,
}

impl From<&Sub> for Command {
    fn from(s: &Sub) -> Self {
        match s {
            Sub::Constants => Command::Constants,
            Sub::ValidateSampler => Command::ValidateSampler,
            Sub::SampleReturns => Command::SampleReturns,
            Sub::TheoremA => Command::TheoremA,
            Sub::TheoremB => Command::TheoremB,
            Sub::Harmonic => Command::Harmonic,
            Sub::LemmaTails => Command::LemmaTails,
        }
    }
}

#[derive(Debug, Args)]
#[command(next_help_heading = "Experiment options")]
struct Flags {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    rho: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base of the natural-scale step policy.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Return-time cap (censoring level).
    #[arg(long, global = true)]
    cap: Option<f64>,
    /// Uncensored returns per sign.
    #[arg(long, global = true)]
    pool: Option<usize>,
    #[arg(long, global = true)]
    cascades: Option<usize>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Comma-separated Mellin arguments.
    #[arg(long, global = true, allow_negative_numbers = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Comma-separated frequencies.
    #[arg(long, global = true, allow_negative_numbers = true)]
    lambdas: Option<String>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    nu_logpow: Option<u32>,
    #[arg(long, global = true)]
    mu_logpow: Option<u32>,
    #[arg(long, global = true)]
    zlo: Option<f64>,
    #[arg(long, global = true)]
    zhi: Option<f64>,
    #[arg(long, global = true)]
    zpoints: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        macro_rules! push {
            ($($f:ident),*) => {$(
                if let Some(val) = &self.$f {
                    v.push((stringify!($f), val.to_string()));
                }
            )*};
        }
        push!(alpha, rho, x, y, seed, workers, dt, cap, pool, cascades, nmax, n, paths, s, samples, lambdas);
        push!(nu, mu, nu_logpow, mu_logpow, zlo, zhi, zpoints);
        if let Some(out) = &self.out {
            v.push(("out", out.display().to_string()));
        }
        v
    }
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<(Command, ExperimentConfig), ExperimentError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.flags.config {
            cfg = cfg.with_file(path)?;
        }
        let pairs = self.flags.overrides();
        cfg = cfg.with_overrides(pairs.iter().map(|(k, v)| (*k, v.as_str())))?;
        cfg.law()?;
        Ok(((&self.command).into(), cfg))
    }
}

/// Entry point of the `skw` binary; returns the process exit code
/// (0 pass, 1 assertion failure or runtime error, 2 usage error).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, cfg) = match cli.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("skw: {e}");
            return 2;
        }
    };
    match run_experiment(command, &cfg) {
        Ok(report) => {
            for a in &report.assertions {
                let status = if a.passed { "PASS" } else { "FAIL" };
                if a.value.is_nan() {
                    println!("{status} {} {}", a.name, a.detail);
                } else {
                    println!("{status} {}: {:.6} vs {:.6} (tol {:.3e}) {}", a.name, a.value, a.target, a.tolerance, a.detail);
                }
            }
            println!("{} -> {}", command.name(), cfg.out.join("summary.json").display());
            report.exit_code()
        }
        Err(e) => {
            eprintln!("skw {}: {e}", command.name());
            1
        }
    }
}
