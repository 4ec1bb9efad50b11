//! `graphmtl`: synthesize data, train, evaluate and apply graph-regularized
//! sparse multi-task models.
//!
//! Exit codes: 0 success, 1 bad usage or input, 2 solver did not converge,
//! 3 filesystem failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};

mod commands;
mod config;

use commands::{PredictArgs, SynthArgs};
use config::RunArgs;

#[derive(Parser)]
#[command(name = "graphmtl", version, about = "Graph-regularized sparse multi-task least squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known coefficients.
    Synth(SynthArgs),
    /// Fit a model on the full dataset (writes model.json, trace.csv, graph.json).
    Train(RunArgs),
    /// k-fold cross-validation (writes report.json, curve.csv).
    Evaluate(RunArgs),
    /// Accuracy-vs-threshold curve from k-fold cross-validation (writes curve.csv).
    Curve(RunArgs),
    /// Score a features file with a trained model.
    Predict(PredictArgs),
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: 3,
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn not_converged(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<graphmtl::Error> for Failure {
    fn from(e: graphmtl::Error) -> Self {
        Failure {
            code: if e.is_io() { 3 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a, false),
        Command::Curve(a) => commands::evaluate(a, true),
        Command::Predict(a) => commands::predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
