use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use spme_cli::{parse_config_with_defaults, run_subcommand, write_outcome, Status};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Verify,
    Simulate,
    Couple,
    Ergodic,
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Couple => "couple",
            Command::Ergodic => "ergodic",
            Command::Report => "report",
        }
    }
}

/// Spectral Galerkin experiments for the stochastic porous medium equation.
#[derive(Debug, Parser)]
#[command(name = "spme", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (`section.key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding `run.out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for ensembles.
    #[arg(long, env = "SPME_JOBS")]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", cli.config.display());
            return ExitCode::from(Status::ConfigOrIo.code() as u8);
        }
    };
    let parsed = match parse_config_with_defaults(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("invalid config {}:\n{e}", cli.config.display());
            return ExitCode::from(Status::ConfigOrIo.code() as u8);
        }
    };
    let mut cfg = parsed.config;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    let jobs = cli
        .jobs
        .filter(|j| *j > 0)
        .or((cfg.jobs > 0).then_some(cfg.jobs))
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let outcome = run_subcommand(cli.command.name(), &cfg, jobs, &parsed.defaulted);
    let mut status = outcome.status;
    if let Err(e) = write_outcome(&cfg.out, &outcome) {
        eprintln!("cannot write to {}: {e}", cfg.out.display());
        status = Status::ConfigOrIo;
    }
    print!("{}", outcome.summary_text());
    ExitCode::from(status.code() as u8)
}
