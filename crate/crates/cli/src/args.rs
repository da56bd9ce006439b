use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_core::{Boundary, Precision};

#[derive(Debug, Parser)]
#[command(name = "dirac-riesz", version, about = "Spectra, reduced problems and Riesz basis diagnostics for Dirac operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localized eigenvalue pairs in the trusted window.
    Spectrum(SpectrumArgs),
    /// Reduced 2x2 coefficients at one index by series and by Schur complement.
    Reduce(ReduceArgs),
    /// Full pipeline ending in a window verdict on the Riesz basis property.
    Criterion(CriterionArgs),
    /// Measured coefficients of a trigonometric potential against their leading asymptotics.
    VerifyExample(VerifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// JSON potential file.
    #[arg(long, value_name = "FILE")]
    pub potential: Option<PathBuf>,
    /// P = a e^{2ix} + b e^{-2ix}, Q = A e^{2ix} + B e^{-2ix}; complex entries like 1, -0.5i or 2+1i.
    #[arg(long, value_name = "a,b,A,B", allow_hyphen_values = true)]
    pub trig: Option<String>,
    /// Potential with Q(m) = t conj P(-m); FILE lists P as [[m, re, im], ...].
    #[arg(long, value_name = "t,FILE", allow_hyphen_values = true)]
    pub xt: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcChoice {
    #[value(name = "per+")]
    Periodic,
    #[value(name = "per-")]
    Antiperiodic,
    Both,
}

impl BcChoice {
    pub fn boundaries(self) -> Vec<Boundary> {
        match self {
            Self::Periodic => vec![Boundary::Periodic],
            Self::Antiperiodic => vec![Boundary::Antiperiodic],
            Self::Both => vec![Boundary::Periodic, Boundary::Antiperiodic],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Mode cutoff M; basis indices satisfy |n| <= 2M.
    #[arg(long, default_value_t = 48)]
    pub modes: usize,
    /// Trusted radius R <= M/2; defaults to M/2.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_enum, default_value = "extended")]
    pub precision: PrecisionArg,
    /// Eigenpair residual bound relative to the Frobenius norm.
    #[arg(long, default_value_t = 1e-10)]
    pub eig_tolerance: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "per-")]
    pub bc: BcChoice,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Boundary condition; `both` picks the one matching the parity of n.
    #[arg(long, value_enum, default_value = "both")]
    pub bc: BcChoice,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Spectral offset from n, |z| <= 1/2.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, default_value_t = 4)]
    pub nu_max: usize,
    /// Series index radius J; defaults to 2|n| + 8.
    #[arg(long)]
    pub index_radius: Option<i64>,
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "per-")]
    pub bc: BcChoice,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Smallest |n| entering the diagnostics.
    #[arg(long, default_value_t = 8)]
    pub min_index: i64,
    /// Fixed-point tolerance of the scalar root equations.
    #[arg(long, default_value_t = 1e-12)]
    pub fp_tolerance: f64,
    /// Also write n against gap, ratio and overlap as CSV.
    #[arg(long)]
    pub emit_plot_data: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Coefficients a,b,A,B of the trigonometric potential; all nonzero.
    #[arg(long, value_name = "a,b,A,B", allow_hyphen_values = true)]
    pub trig: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Series order; defaults to the leading order plus two at each n.
    #[arg(long)]
    pub nu_max: Option<usize>,
    #[arg(long)]
    pub index_radius: Option<i64>,
}
