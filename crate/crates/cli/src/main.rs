//! `rotorgw`: rotor-router experiments on Galton-Watson trees.
//!
//! Exit codes: 0 success, 1 runtime failure or failed check, 2 invalid
//! input, 3 a result flagged as not converged.

mod abelian;
mod config;
mod experiments;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "rotorgw", version, about = "Rotor-router walks on Galton-Watson trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recurrence/transience verdict from E[nu] for nu = xi . Q.
    Classify(experiments::ClassifyArgs),
    /// Escape counts E_n of chained walks, one row per seed.
    EscapeRate(experiments::EscapeArgs),
    /// Frontier process snapshots with the proportion-estimate audit.
    Frontier(experiments::FrontierArgs),
    /// Fixed point of the CDF operator for the escape-probability law.
    GammaCdf(experiments::GammaArgs),
    /// Order independence of legal sequences on random finite trees.
    AbelianCheck(abelian::AbelianArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<rotorgw::Error> for CliError {
    fn from(e: rotorgw::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Failed(e.to_string())
        }
    }
}

/// How a command that ran to completion ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A check the command performs did not hold.
    CheckFailed,
    NotConverged,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(a) => experiments::classify(a),
        Command::EscapeRate(a) => experiments::escape_rate(a),
        Command::Frontier(a) => experiments::frontier(a),
        Command::GammaCdf(a) => experiments::gamma_cdf(a),
        Command::AbelianCheck(a) => abelian::abelian_check(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Ok(Status::NotConverged) => ExitCode::from(3),
        // a closed downstream pipe (`| head`) is not a failure
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rotorgw: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
