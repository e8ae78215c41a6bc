//! `t2vqa`: batch front end for feature extraction, classifier and ensemble
//! training, caption similarity, final scoring and ratings analysis.

mod cmd;
mod config;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "t2vqa",
    version,
    about = "Text-to-video quality assessment toolkit"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-video naturalness features from a manifest.
    Features(cmd::features::FeaturesArgs),
    /// Fit a NIQE model to a corpus of pristine frames.
    FitNiqe(cmd::features::FitNiqeArgs),
    /// Grid-search and train the naturalness classifier.
    TrainClassifier(cmd::train::TrainArgs),
    /// Caption every video and score it against its prompt.
    Textsim(cmd::textsim::TextsimArgs),
    /// Fit the linear ensemble to human ratings.
    TrainEnsemble(cmd::ensemble::TrainEnsembleArgs),
    /// Combine naturalness and text similarity into final scores.
    Score(cmd::ensemble::ScoreArgs),
    /// Analyse human ratings and write the report bundle.
    Analyze(cmd::analyze::AnalyzeArgs),
}

fn run() -> anyhow::Result<()> {
    let args = config::expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let body = msg.split("\nUsage:").next().unwrap_or(&msg);
            let flat = body.split_whitespace().collect::<Vec<_>>().join(" ");
            return Err(anyhow::anyhow!(flat
                .trim_start_matches("error: ")
                .to_string()));
        }
    };
    match cli.command {
        Command::Features(a) => cmd::features::run(&a),
        Command::FitNiqe(a) => cmd::features::run_fit_niqe(&a),
        Command::TrainClassifier(a) => cmd::train::run(&a),
        Command::Textsim(a) => cmd::textsim::run(&a),
        Command::TrainEnsemble(a) => cmd::ensemble::run_train(&a),
        Command::Score(a) => cmd::ensemble::run_score(&a),
        Command::Analyze(a) => cmd::analyze::run(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let retriable = e.chain().any(|c| {
                c.downcast_ref::<t2vqa_core::Error>()
                    .is_some_and(t2vqa_core::Error::is_retriable)
            });
            let msg = format!("{e:#}").replace('\n', " ");
            let line = serde_json::json!({ "error": msg, "retriable": retriable });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
