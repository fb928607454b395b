use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "latspec", version, about = "Spectral diagnostics for discrete Schrödinger operators on Z^d")]
pub struct Cli {
    /// Worker threads (falls back to LATSPEC_THREADS, then machine parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run configuration as a JSON file instead of a subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Contents of a `--config` file.
#[derive(Deserialize, Debug)]
pub struct RunConfig {
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Subcommand, Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Free resolvent kernel R0(lambda)(n).
    Green(GreenArgs),
    /// Determinant D(z) = det(I + V R0(lambda(z))).
    DetEval(DetArgs),
    /// Taylor coefficients of log D and the moment relations.
    TaylorCheck(TaylorArgs),
    /// Zeros of D in the disc, i.e. eigenvalues of H.
    Eigs(EigsArgs),
    /// Trace formula residuals, Jensen identities and outer reconstruction.
    TraceCheck(TraceArgs),
    /// Eigenvalue-sum estimates.
    BoundsReport(BoundsArgs),
    /// Bessel identities, transition-regime constant and beta integrals.
    BesselCheck(BesselArgs),
    /// Coupling sweep t V written as CSV.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Green(_) => "green",
            Command::DetEval(_) => "det-eval",
            Command::TaylorCheck(_) => "taylor-check",
            Command::Eigs(_) => "eigs",
            Command::TraceCheck(_) => "trace-check",
            Command::BoundsReport(_) => "bounds-report",
            Command::BesselCheck(_) => "bessel-check",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Command::Green(a) => a.output.as_ref(),
            Command::DetEval(a) => a.output.as_ref(),
            Command::TaylorCheck(a) => a.output.as_ref(),
            Command::Eigs(a) => a.output.as_ref(),
            Command::TraceCheck(a) => a.output.as_ref(),
            Command::BoundsReport(a) => a.output.as_ref(),
            Command::BesselCheck(a) => a.output.as_ref(),
            Command::Sweep(a) => a.output.as_ref(),
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Plus,
    Minus,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Auto,
    Torus,
    Nested,
    Time,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct GreenArgs {
    #[arg(long)]
    pub d: Option<usize>,
    /// Spectral parameter as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Lattice site as comma-separated integers (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub site: Option<String>,
    /// Boundary value on the cut from the given side; lambda must be real.
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub n_quad: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct DetArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Disc point as "re,im"; |z| = 1 evaluates the boundary value.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct TaylorArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Comma-separated contour radii (default 0.03,0.015).
    #[arg(long)]
    pub radii: Option<String>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub m_samples: Option<usize>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct EigsArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub r_outer: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct TraceArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    /// Comma-separated Jensen radii (default 0.5,0.8,0.95).
    #[arg(long)]
    pub r_list: Option<String>,
    #[arg(long)]
    pub r_outer: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of random interior probes for the outer reconstruction.
    #[arg(long)]
    pub n_probes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(long)]
    pub r_outer: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct BesselArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub m_min: Option<i64>,
    #[arg(long)]
    pub m_max: Option<i64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub n_m: Option<usize>,
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub beta_m_max: Option<usize>,
    #[arg(long)]
    pub beta_t: Option<f64>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    /// Potential shape; row k uses t_k V.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub r_outer: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also sample the boundary trace on this grid at each coupling.
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(short, long)]
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}
