//! `mprep` command-line front end.

mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "mprep", version, about = "Deterministic preparation of matrix product states by measurement and feed-forward")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a family tensor and analyse it, or sweep a trajectory into CSV.
    Family(FamilyArgs),
    /// Run the measurement-and-correction protocol and report fidelities.
    Prepare(PrepareArgs),
    /// Search for a unitary error basis certifying the tensor as preparable.
    Diagnose(DiagnoseArgs),
    /// Run the 2D protocol on a small PEPS with parity statistics.
    Peps(PepsArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// How the tensor is specified. Exactly one source is used.
#[derive(Args, Debug, Clone, Default)]
pub struct Descriptor {
    /// Named point: trivial, cluster, aklt, ghz, neel.
    #[arg(long)]
    pub point: Option<String>,
    /// Trajectory: deformedCluster, clusterToGHZ, deformedAKLT (with --beta or --beta-grid).
    #[arg(long)]
    pub trajectory: Option<String>,
    /// Trajectory parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Explicit weights: 4 values in (𝟙, X, Y, Z) order for χ=2, else χ² values row-major.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    /// Transfer spectrum μ (complex entries like 0.5 or 0.1-0.2i), ordered as --lambda, μ₀ = 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub spectrum: Option<Vec<String>>,
    /// Nice error basis: pauli, quaternion, or clockN (e.g. clock3).
    #[arg(long)]
    pub nice_basis: Option<String>,
    /// Conjugacy-class weights for --nice-basis.
    #[arg(long, value_delimiter = ',')]
    pub class_weights: Option<Vec<f64>>,
    /// Deformed spin-1 AKLT tensor; uses --m or a random M drawn from --seed.
    #[arg(long)]
    pub aklt_deformed: bool,
    /// Row-major 3x3 deformation, complex entries.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m: Option<Vec<String>>,
    /// Tensor file (bare tensor or {tensor, basis}).
    #[arg(long)]
    pub tensor: Option<String>,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub descriptor: Descriptor,
    /// Sweep start:stop:step for a trajectory.
    #[arg(long, allow_hyphen_values = true)]
    pub beta_grid: Option<String>,
    /// Chain length used for the entanglement analysis.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to csv for sweeps and json otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    #[command(flatten)]
    pub descriptor: Descriptor,
    /// Basis override: pauli, clockN, or default (tensor-file basis, else Pauli/clock).
    #[arg(long)]
    pub basis: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Computational-basis target measurements only (Ising family).
    #[arg(long)]
    pub incomplete: bool,
    /// Ising bond family with --beta.
    #[arg(long)]
    pub ising: bool,
    /// Apply the stored cluster MPO to an input MPS (--tensor with d=2, else random from --seed).
    #[arg(long)]
    pub mpo: bool,
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub descriptor: Descriptor,
    /// Optimization restarts after the closed-form candidates.
    #[arg(long, default_value_t = mprep::diagnostics::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Search the intersection with the k-site blocked solution space.
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args, Debug)]
pub struct PepsArgs {
    /// toric or ghz.
    #[arg(long)]
    pub example: String,
    /// LXxLY-torus or LXxLY-open.
    #[arg(long, default_value = "2x2-torus")]
    pub lattice: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Samples for the parity statistics.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ZZ-only bond measurements (toric example).
    #[arg(long)]
    pub incomplete: bool,
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Run a single criterion (1-11).
    #[arg(long)]
    pub criterion: Option<usize>,
    /// JSON report file.
    #[arg(long)]
    pub output: Option<String>,
}

fn main() -> ExitCode {
    let args = match config::inject_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
