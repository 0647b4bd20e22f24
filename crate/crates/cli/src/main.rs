//! `textclf`: fit, evaluate, explain and benchmark TFIDF + linear SVM text
//! classifiers.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence
//! (only with `--fail-on-nonconvergence`; otherwise it is a warning).

mod args;
mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "textclf",
    version,
    about = "Deterministic TFIDF + linear SVM text classification"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores). Results do
    /// not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model on a dataset (optionally on the train side of a split).
    Fit(commands::FitArgs),
    /// Evaluate a model on a labeled dataset and write reports.
    Evaluate(commands::EvaluateArgs),
    /// Predict classes for text, optionally with exact explanations.
    Predict(commands::PredictArgs),
    /// Run split, fit and evaluate per dataset and compare with published results.
    Benchmark(commands::BenchmarkArgs),
    /// Write the train/test document ids of a split for auditing.
    Split(commands::SplitCmdArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };

    let result = pool.install(|| match cli.command {
        Command::Fit(args) => commands::fit(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Predict(args) => commands::predict(&args),
        Command::Benchmark(args) => commands::benchmark(&args),
        Command::Split(args) => commands::split(&args),
    });

    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                CliError::Usage(_) => 1,
                CliError::Data { .. } => 2,
                CliError::NotConverged(_) => 3,
            })
        }
    }
}
