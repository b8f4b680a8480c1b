//! `nlgraph`: statistics, evaluation, sweeps, training and prediction for
//! chaos-feature node classification.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "nlgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Node, edge and class counts plus homophily
    Stats(Flags),
    /// Fixed-parameter train/test evaluation
    Eval(Flags),
    /// Cross-validated (q, b, epsilon) sweep on the training split
    Sweep(Flags),
    /// Fit a model on every node and save it
    Train(Flags),
    /// Label nodes with a saved model
    Predict(Flags),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (flags, f): (&Flags, fn(&RunConfig) -> anyhow::Result<()>) = match &cli.command {
        Command::Stats(fl) => (fl, commands::stats),
        Command::Eval(fl) => (fl, commands::eval),
        Command::Sweep(fl) => (fl, commands::sweep),
        Command::Train(fl) => (fl, commands::train),
        Command::Predict(fl) => (fl, commands::predict),
    };
    let cfg = RunConfig::resolve(flags)?;
    f(&cfg)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<neurochaos::Error>() {
        Some(neurochaos::Error::Io { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
