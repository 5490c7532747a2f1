//! `qdarwin`: sweep a pure-decoherence record model and emit plot-ready
//! tables. Exit codes: 0 success, 1 invalid config/caps/IO, 2 numerical
//! failure or a failed oracle check.

mod commands;
mod config;
mod table;

use clap::Parser;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration, cap violation, or I/O trouble: exit 1.
    Config(String),
    /// A computation failed on a valid configuration: exit 2.
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

/// Classify a library failure: dimension caps and fit-window problems trace
/// back to the request, everything else is an internal numerical failure.
pub fn core_err(e: qdarwin::Error) -> CliError {
    match e {
        qdarwin::Error::DimensionCap { .. } | qdarwin::Error::FitWindow(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "qdarwin",
    version,
    about = "Decoherence-model information sweeps: plateau curves, redundancy scans, \
             decay-exponent fits, and brute-force cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Information measures vs fragment size, one row per size
    InfoCurve(config::CommonArgs),
    /// Minimal sufficient fragments and redundancy per measure and deficit
    Redundancy(config::CommonArgs),
    /// Full joint-state evolution cross-checked against the closed forms
    OracleCheck(config::CommonArgs),
    /// Decay exponents fitted to deficit curves, vs the analytic value
    FitExponent(config::CommonArgs),
}

fn run(cli: Cli) -> Result<usize, CliError> {
    match cli.command {
        Command::InfoCurve(args) => {
            let cfg = config::load(&args, config::CommandKind::InfoCurve)?;
            commands::info_curve(&cfg)?.write(&cfg)?;
            Ok(0)
        }
        Command::Redundancy(args) => {
            let cfg = config::load(&args, config::CommandKind::Redundancy)?;
            commands::redundancy_scan(&cfg)?.write(&cfg)?;
            Ok(0)
        }
        Command::OracleCheck(args) => {
            let cfg = config::load(&args, config::CommandKind::OracleCheck)?;
            let (table, failed) = commands::oracle_check(&cfg)?;
            table.write(&cfg)?;
            Ok(failed)
        }
        Command::FitExponent(args) => {
            let cfg = config::load(&args, config::CommandKind::FitExponent)?;
            commands::fit_exponent(&cfg)?.write(&cfg)?;
            Ok(0)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to standard output with a zero exit; real
            // argument errors are invalid requests, exit 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(0) => {}
        Ok(failed) => {
            eprintln!("error: {failed} oracle check(s) outside tolerance");
            std::process::exit(2);
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}
