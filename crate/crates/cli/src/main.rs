//! `vsynth` command line: generate corpora, run the DSP baseline, train the
//! model, infer rates and evaluate them.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
//! The last line on stdout of every successful command is
//! `manifest {"command": ..., "outputs": [...]}`.

mod analyze;
mod common;
mod generate;
mod infer;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::CliError;

#[derive(Parser)]
#[command(name = "vsynth", version, about = "Synthetic vital-sign videos, rate estimation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render `count` videos with seeds seed, seed+1, ... plus sidecars and a manifest.
    Generate(generate::Args),
    /// Classical ROI-average / DoG / band-pass / DFT-or-peaks rate.
    Analyze(analyze::Args),
    /// Train the model on streamed synthetic videos.
    Train(train::Args),
    /// Predict signal, ROI and rate for one video.
    Infer(infer::InferArgs),
    /// Predict and score against reference annotations.
    Evaluate(infer::EvaluateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Train(a) => train::run(a),
        Command::Infer(a) => infer::run_infer(a),
        Command::Evaluate(a) => infer::run_evaluate(a),
    };
    match result {
        Ok(manifest) => {
            println!("{manifest}");
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
