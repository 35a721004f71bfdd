mod args;
mod commands;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;
use plap::error::Error;

use args::{Cli, Command};

/// Exit codes: 2 bad input, 3 eigen solver failure, 4 step-size underflow,
/// 1 any other numerical failure.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    pub fn eigen(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }

    pub fn underflow(t: f64) -> Failure {
        Failure {
            code: 4,
            message: format!("step size fell below dt_min at t = {t:.6e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Schema(_)
            | Error::Validation { .. }
            | Error::UnknownVertex(_)
            | Error::NotBoundaryVertex(_)
            | Error::InvalidExponent(_)
            | Error::InvalidState(_)
            | Error::DegenerateCoefficients
            | Error::NotAdmissible(_)
            | Error::InvalidNonlinearity(_)
            | Error::InvalidParams(_)
            | Error::HypothesisFailed { .. }
            | Error::Config(_) => 2,
            Error::EigenConvergence(_) | Error::ConvergenceFailure(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Eigen(a) => commands::eigen_cmd(a),
        Command::CheckCondition(a) => commands::check_condition_cmd(a),
        Command::B0(a) => commands::b0_cmd(a),
        Command::FindInitial(a) => commands::find_initial_cmd(a),
        Command::Compare(a) => commands::compare_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
