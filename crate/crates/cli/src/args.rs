use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spartan_core::models::{parse_real, BlParams, Model, SsrfParams};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "spartan", version, about = "Spartan and Bessel-Lommel covariance toolkit")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate covariance, autocorrelation or spectral density.
    Eval(EvalArgs),
    /// Integral range and correlation spectrum over a set of alpha values.
    Scales(ScalesArgs),
    /// Simulate planar Gaussian fields and estimate their statistics.
    Simulate(SimulateArgs),
    /// Compare closed forms with the quadrature oracle.
    Validate(ValidateArgs),
}

fn real(s: &str) -> Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Ssrf,
    #[value(alias = "bessel-lommel")]
    Bl,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Scale factor of the spectral density.
    #[arg(long, default_value = "1", value_parser = real, allow_hyphen_values = true)]
    pub eta0: f64,
    /// Rigidity coefficient.
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub eta1: f64,
    /// Characteristic length.
    #[arg(long, default_value = "1", value_parser = real, allow_hyphen_values = true)]
    pub xi: f64,
    /// Spectral cutoff; `inf` is accepted for ssrf only.
    #[arg(long, default_value = "inf", value_parser = real, allow_hyphen_values = true)]
    pub kc: f64,
    /// Spatial dimension.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
}

impl ModelArgs {
    pub fn model(&self) -> Result<Model, CliError> {
        Ok(match self.family {
            FamilyArg::Ssrf => Model::Ssrf(SsrfParams::new(self.eta0, self.eta1, self.xi, self.kc, self.d)?),
            FamilyArg::Bl => Model::BesselLommel(BlParams::new(self.eta0, self.eta1, self.xi, self.kc, self.d)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Covariance C(r).
    Cov,
    /// Autocorrelation C(r)/C(0).
    Autocorr,
    /// Spectral density C~(k).
    Spd,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Lower end of the lag (or wavenumber) range.
    #[arg(long, default_value = "0", value_parser = real)]
    pub min: f64,
    /// Upper end of the lag (or wavenumber) range.
    #[arg(long, visible_aliases = ["rmax", "kmax"], value_parser = real)]
    pub max: f64,
    /// Number of evenly spaced points, both ends included.
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Args)]
pub struct ScalesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated alpha values in [0, 1].
    #[arg(long, value_parser = real, value_delimiter = ',', conflicts_with = "alpha_grid")]
    pub alpha: Option<Vec<f64>>,
    /// Number of evenly spaced alpha values covering [0, 1].
    #[arg(long)]
    pub alpha_grid: Option<usize>,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldFormat {
    Binary,
    Csv,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid side, a power of two.
    #[arg(long, default_value_t = 512)]
    pub size: usize,
    #[arg(long, default_value = "1", value_parser = real)]
    pub spacing: f64,
    /// Number of realizations.
    #[arg(long, default_value_t = 1)]
    pub n_real: usize,
    /// Base seed; realization i uses seed + i.
    #[arg(long, conflicts_with = "clock_seed")]
    pub seed: Option<u64>,
    /// Seed from the system clock (the seed is logged and recorded).
    #[arg(long)]
    pub clock_seed: bool,
    #[arg(long, env = "SPARTAN_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Field file format; statistics are always JSON.
    #[arg(long, value_enum, default_value = "binary")]
    pub format: FieldFormat,
    /// Largest lag of the empirical covariance (default 10 xi, clipped to a quarter of the domain).
    #[arg(long, value_parser = real)]
    pub max_lag: Option<f64>,
    /// Wavenumber band `lo,hi` of the periodogram slope fit.
    #[arg(long, value_parser = real, value_delimiter = ',')]
    pub slope_band: Option<Vec<f64>>,
    /// Also run the non-ergodicity probe and write probe.json.
    #[arg(long)]
    pub probe: bool,
    /// Skip writing field files.
    #[arg(long)]
    pub stats_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Ssrf,
    Bl,
    Scales,
    All,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Tolerance override `check=value` (repeatable).
    #[arg(long = "tol", value_name = "CHECK=VALUE")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
