//! `rkbs`: train and apply regularized learners on CSV data, and run the
//! built-in verification suites.
//!
//! Exit codes: 0 success, 1 input error, 2 no convergence, 3 failed check.

mod data;
mod error;
mod json;
mod model;
mod predict;
mod train;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

const INPUT_ERROR: u8 = 1;
const NOT_CONVERGED: u8 = 2;
const CHECK_FAILED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rkbs",
    version,
    about = "Vector-valued kernel learning in semi-inner-product spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model and write it as JSON.
    Train(train::TrainArgs),
    /// Evaluate a saved model on the inputs of a CSV file.
    Predict(predict::PredictArgs),
    /// Run the counterexample and kernel-property checks.
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(INPUT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Train(args) => train::run(args).map(|o| if o.converged { 0 } else { NOT_CONVERGED }),
        Command::Predict(args) => predict::run(args).map(|()| 0),
        Command::Verify(args) => verify::run(args).and_then(|report| {
            verify::emit(args, &report)?;
            Ok(if report.passed { 0 } else { CHECK_FAILED })
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
