//! Command-line flags and the TOML config overlay.
//!
//! Every flag is optional on the parser side; a value is taken from the
//! flag, then from the config file (`[<command>]` table first, then the top
//! level), then from the built-in default.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "pfzeros", version, about = "Partition-function zeros of spin chains from simulated ancilla coherence")]
pub struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (overrides PFZ_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write JSON sidecars.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lee-Yang zeros from the closed forms, the sector polynomial or a sweep.
    #[command(allow_negative_numbers = true)]
    Zeros(ZerosArgs),
    /// One coherence trace along θ at fixed h_r, plus its zeros.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Coherence over the complex-field plane.
    #[command(allow_negative_numbers = true)]
    Scan(ScanArgs),
    /// Coherence over the complex-β plane.
    #[command(allow_negative_numbers = true)]
    Fisher(FisherArgs),
    /// Free energy rebuilt from zeros, against the exact value.
    #[command(allow_negative_numbers = true)]
    Reconstruct(ReconstructArgs),
    /// Variational TFD angles.
    #[command(allow_negative_numbers = true)]
    TfdOptimize(TfdArgs),
    /// Least-squares fit of the linear-shift XX noise parameters.
    #[command(allow_negative_numbers = true)]
    NoiseFit(NoiseFitArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Zeros(_) => "zeros",
            Command::Sweep(_) => "sweep",
            Command::Scan(_) => "scan",
            Command::Fisher(_) => "fisher",
            Command::Reconstruct(_) => "reconstruct",
            Command::TfdOptimize(_) => "tfd-optimize",
            Command::NoiseFit(_) => "noise-fit",
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// xxz, ising, xy or xy-jw.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// XY coupling (Ising coupling for --model ising).
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub jz: Option<f64>,
    /// Real field h_r.
    #[arg(long)]
    pub hr: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// periodic, open or jw (xy-jw defaults to jw).
    #[arg(long)]
    pub boundary: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct ZerosArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// analytic, polynomial or circuit.
    #[arg(long)]
    pub method: Option<String>,
    /// native, field or fugacity.
    #[arg(long)]
    pub plane: Option<String>,
    /// θ resolution of the circuit sweep.
    #[arg(long)]
    pub resolution: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct PrepArgs {
    /// exact, reference, optimize or angles.
    #[arg(long)]
    pub prep: Option<String>,
    /// Angles CSV for --prep angles.
    #[arg(long)]
    pub angles: Option<PathBuf>,
    /// Ansatz layers for --prep optimize.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Optimizer restarts for --prep optimize.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// Number of θ points on [0, π].
    #[arg(long)]
    pub points: Option<usize>,
    /// exact or shots.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub shots: Option<usize>,
    /// Linear-shift noise `a,b` on every XX-type gate.
    #[arg(long)]
    pub noise: Option<String>,
    /// none, m1, m2 or m1m2.
    #[arg(long)]
    pub postselect: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub hr_min: Option<f64>,
    #[arg(long)]
    pub hr_max: Option<f64>,
    #[arg(long)]
    pub hr_points: Option<usize>,
    /// Number of θ points on [0, π].
    #[arg(long)]
    pub points: Option<usize>,
    /// exact or shots.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct FisherArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub br_min: Option<f64>,
    #[arg(long)]
    pub br_max: Option<f64>,
    #[arg(long)]
    pub br_points: Option<usize>,
    #[arg(long)]
    pub bi_min: Option<f64>,
    #[arg(long)]
    pub bi_max: Option<f64>,
    #[arg(long)]
    pub bi_points: Option<usize>,
    /// Trotter steps; omitted means the exact controlled unitary.
    #[arg(long)]
    pub trotter_steps: Option<usize>,
    /// 1 or 2.
    #[arg(long)]
    pub trotter_order: Option<String>,
    /// exact or shots.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated couplings J for the F(J) curve.
    #[arg(long)]
    pub j_values: Option<String>,
    /// analytic, polynomial or sweep.
    #[arg(long)]
    pub source: Option<String>,
    /// Zero CSV for a single reconstruction at --j.
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    /// θ resolution of sweep-sourced zeros.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Skip the conjugate/reciprocal completion.
    #[arg(long)]
    pub no_symmetry: bool,
}

#[derive(Debug, Args, Clone)]
pub struct TfdArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// nm or cd.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct NoiseFitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// Trace CSV to fit (as written by `sweep`).
    #[arg(long)]
    pub observed: Option<PathBuf>,
    /// Fit a synthetic trace generated at `a,b` instead.
    #[arg(long)]
    pub planted: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub fit_restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Config-file values, scoped to one command.
#[derive(Debug, Default)]
pub struct Config {
    scoped: toml::Table,
    global: toml::Table,
}

impl Config {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, command)
    }

    pub fn parse(text: &str, command: &str) -> Result<Self, CliError> {
        let mut global: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("config is not valid TOML: {e}")))?;
        let scoped = match global.remove(command) {
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(CliError::Usage(format!("config key `{command}` must be a table"))),
            None => toml::Table::new(),
        };
        Ok(Self { scoped, global })
    }

    fn lookup<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        let Some(v) = self.scoped.get(key).or_else(|| self.global.get(key)) else { return Ok(None) };
        v.clone().try_into().map(Some).map_err(|e| CliError::Usage(format!("config `{key}`: {e}")))
    }

    /// Flag, then config, then `default`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(match flag {
            Some(v) => v,
            None => self.lookup(key)?.unwrap_or(default),
        })
    }

    /// Flag, then config; `None` when neither is set.
    pub fn maybe<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.lookup(key),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.lookup(key)?.unwrap_or(false))
    }
}

/// Parses a string option through `FromStr`, as a usage error on failure.
pub fn parse_choice<T: FromStr>(value: &str, what: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| CliError::Usage(format!("bad --{what} `{value}`: {e}")))
}

pub fn parse_list(value: &str, what: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad --{what} entry `{s}`"))))
        .collect()
}
