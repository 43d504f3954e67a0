//! `quads`: generate instances, run runtime campaigns, fit scaling models and
//! summarize results.

mod fit;
mod generate;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "quads", version, about = "Noisy adiabatic search on Exact Cover 3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random unique-solution instances and a manifest.
    Generate(generate::Args),
    /// Run a runtime campaign described by a TOML config.
    Run(run::Args),
    /// Fit scaling models to a medians file.
    Fit(fit::Args),
    /// Summarize the outputs of a campaign directory.
    Report(report::Args),
}

/// Outcome of a successful command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    /// Results were written but some medians rest on too many quarantined runs.
    Degraded,
}

pub(crate) fn ensure_dir(path: &PathBuf) -> anyhow::Result<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| anyhow::anyhow!("cannot create output directory {}: {e}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate::execute(args),
        Command::Run(args) => run::execute(args),
        Command::Fit(args) => fit::execute(args),
        Command::Report(args) => report::execute(args),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Degraded) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
