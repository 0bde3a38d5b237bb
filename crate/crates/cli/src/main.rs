//! `cubetto`: render story prompts, collect model answers, lint them and
//! simulate the programs they describe.
//!
//! Exit status is 0 on success, 1 when an operation fails (a model call,
//! a write) and 2 for usage or configuration errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or input files.
    Usage(String),
    /// The operation itself failed.
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cubetto", version, about = "Story scenarios for the Cubetto robot")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, env = "CUBETTO_CONFIG")]
    config: Option<PathBuf>,
    /// Serve model answers from this directory instead of HTTP endpoints.
    #[arg(long, global = true)]
    replay: Option<PathBuf>,
    /// Archive root, overriding the configuration.
    #[arg(long, global = true)]
    archive: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct VariantArgs {
    /// Ask for about half a page.
    #[arg(long)]
    half_page: bool,
    /// Ask for at most this many characters.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    char_limit: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the preset scenarios.
    Presets,
    /// Print the rendered prompt for a preset or custom parameters.
    Prompt {
        #[command(flatten)]
        scenario: commands::ScenarioArgs,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Generate one scenario, lint it and archive it.
    Generate {
        #[command(flatten)]
        scenario: commands::ScenarioArgs,
        #[command(flatten)]
        variant: VariantArgs,
        /// Model to ask; required when several are configured.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        round: u32,
    },
    /// Lint a scenario text or an archived scenario.
    Lint {
        file: PathBuf,
        /// Preset the text was written for, enabling the task check.
        #[arg(long)]
        preset: Option<u8>,
        /// Finish reason reported by the server.
        #[arg(long, default_value = "stop")]
        finish_reason: String,
    },
    /// Run a block program on a grid.
    Simulate(commands::SimulateArgs),
    /// Generate every preset with every model for several rounds.
    Batch {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        rounds: u32,
        /// Restrict to these models.
        #[arg(long = "model")]
        models: Vec<String>,
        /// Restrict to these presets.
        #[arg(long = "preset")]
        presets: Vec<u8>,
        /// Also write teacher documents.
        #[arg(long)]
        teacher: bool,
        #[command(flatten)]
        variant: VariantArgs,
    },
    /// Rebuild the comparison table from the archive.
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(archive) = &cli.archive {
        config.archive = archive.clone();
    }
    let ctx = commands::Context { config, replay: cli.replay, json: cli.json };
    match cli.command {
        Command::Presets => commands::presets(&ctx),
        Command::Prompt { scenario, variant } => commands::prompt(&ctx, &scenario, &variant),
        Command::Generate { scenario, variant, model, round } => {
            commands::generate(&ctx, &scenario, &variant, model.as_deref(), round)
        }
        Command::Lint { file, preset, finish_reason } => commands::lint(&ctx, &file, preset, &finish_reason),
        Command::Simulate(args) => commands::simulate(&ctx, &args),
        Command::Batch { rounds, models, presets, teacher, variant } => {
            commands::batch(&ctx, rounds, &models, &presets, teacher, &variant)
        }
        Command::Report => commands::report(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Failure(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}
