//! `qdiscord`: generate states, compute discord, run identity checks and
//! integrate closed dynamics.
//!
//! Exit codes: 0 success or check passed, 1 check failed, 2 parse or
//! validation error, 3 dimension or partition error, 4 singular marginal.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qdiscord::Error;

#[derive(Debug, Parser)]
#[command(name = "qdiscord", version, about = "Relative-entropy discord toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Root seed; every random choice derives from it
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Optimizer starts for discord searches
    #[arg(long, global = true, default_value_t = 32)]
    pub starts: usize,
    /// Pass/fail tolerance for checks
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress status messages on standard error
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a state (or Hamiltonian) as JSON
    Gen(GenArgs),
    /// Compute discord of a state file
    Discord(DiscordArgs),
    /// Verify a structural identity on a state file
    Check(CheckArgs),
    /// Trajectory of entropies and rates as CSV
    Dynamics(DynamicsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Random,
    Pure,
    Bell,
    Ghz,
    Cq,
    ZeroDiscord,
    BiSsa,
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Eigenbasis,
    Free,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Subsystem dimensions, comma separated
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    pub dims: Vec<usize>,
    /// Rank of a random state; full rank when absent
    #[arg(long)]
    pub rank: Option<usize>,
    /// Number of qubits for ghz
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Local bases of a zero-discord construction
    #[arg(long, value_enum, default_value_t = Basis::Eigenbasis)]
    pub mode: Basis,
    /// Project a generated Hamiltonian onto its interaction part
    #[arg(long)]
    pub interaction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    Sym,
    Npartite,
}

#[derive(Debug, Args)]
pub struct DiscordArgs {
    pub state: PathBuf,
    #[arg(long, value_enum, default_value_t = SideArg::B)]
    pub side: SideArg,
    /// Sweeps per start
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// A start stops once a sweep gains less than this
    #[arg(long, default_value_t = 1e-9)]
    pub opt_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Lazy,
    ProductCommutator,
    Remark,
    Petz,
    DoubleSsa,
    BiSsa,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub state: PathBuf,
    #[arg(long, value_enum)]
    pub what: CheckKind,
    /// Measurement JSON (remark: on the whole state; double-ssa: on B)
    #[arg(long)]
    pub pvm: Option<PathBuf>,
    /// Channel JSON for petz; identity when absent
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Reference state for petz; maximally mixed when absent
    #[arg(long)]
    pub sigma: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    pub state: PathBuf,
    /// Hamiltonian JSON with bipartite dims
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Use log2 on the support of rank-deficient marginals
    #[arg(long)]
    pub force_support: bool,
}

/// Outcome of a command that produced its output.
pub enum Status {
    Done,
    CheckFailed,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DimMismatch(_) | Error::BadPartition(_) | Error::CountMismatch { .. } | Error::NotSquare(..) => 3,
        Error::SingularMarginal(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
