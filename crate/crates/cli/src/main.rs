//! `esdkit`: evolutions, sweeps, disentanglement times and bound checks for
//! two atoms decaying by spontaneous emission.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "esdkit", version, about = "Entanglement sudden death under spontaneous emission")]
struct Cli {
    /// key=value manifest; explicit flags override its entries
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the master equation and compare with the Kraus channel
    Evolve(EvolveArgs),
    /// Concurrence surface over (a, t) plus a disentanglement-time summary
    Sweep(SweepArgs),
    /// Disentanglement time of one family member
    Td(TdArgs),
    /// Monte Carlo check of the concurrence decay bound
    Bound(BoundArgs),
    /// Run the built-in invariant suite
    Check,
}

/// Accepts decimals and simple fractions such as `2/3`.
fn real(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("{e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("{e}"))?;
            p / q
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Decay rate Γ
    #[arg(long, value_parser = real, default_value = "1")]
    pub gamma_rate: f64,
    /// Report times as Γt
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub natural_units: bool,
    /// Output file; stdout when absent or `-`
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Initial {
    Family,
    Random,
    Bell,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Family parameter a in [0, 1]
    #[arg(long, value_parser = real, default_value = "1")]
    pub a: f64,
    #[arg(long, value_enum, default_value = "family")]
    pub initial: Initial,
    /// Seed for `--initial random`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = real, default_value = "3")]
    pub t_max: f64,
    /// Step; defaults to min(1e-3/Γ, 0.1/λ)
    #[arg(long, value_parser = real)]
    pub dt: Option<f64>,
    /// Memory rate λ of the exponential kernel; Markov when absent
    #[arg(long, value_parser = real)]
    pub lambda: Option<f64>,
    /// Kernel centre frequency; resonant with each atom when absent
    #[arg(long, value_parser = real)]
    pub center_frequency: Option<f64>,
    /// Tabulated kernel, lines of `tau alpha_re alpha_im`
    #[arg(long, conflicts_with = "lambda")]
    pub kernel_file: Option<PathBuf>,
    #[arg(long, value_parser = real, default_value = "0")]
    pub omega_a: f64,
    #[arg(long, value_parser = real, default_value = "0")]
    pub omega_b: f64,
    /// Write every n-th step
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = real, default_value = "0")]
    pub a_min: f64,
    #[arg(long, value_parser = real, default_value = "1")]
    pub a_max: f64,
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(1..))]
    pub a_points: u64,
    /// End of the time grid
    #[arg(long, value_parser = real, default_value = "3")]
    pub t_max: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub t_points: u64,
    /// JSON summary path; defaults to `<output>.summary.json` next to a file output
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct TdArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = real)]
    pub a: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Fixed surviving amplitude; drawn per sample when absent
    #[arg(long, value_parser = real)]
    pub gamma: Option<f64>,
}

pub enum Failure {
    Usage(String),
    Numeric(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Invariant(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<esdkit_core::Error> for Failure {
    fn from(e: esdkit_core::Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("esdkit: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Evolve(a) => commands::evolve(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Td(a) => commands::td(&a),
        Command::Bound(a) => commands::bound(&a),
        Command::Check => commands::check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("esdkit: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
