mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use odm::io::Transform;
use odm::ModelKind;

use crate::config::{Overrides, RunConfig};
use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "odm", version, about = "Observation-driven models with feasible invertibility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Simulate a series and its true filter path.
    Simulate,
    /// Maximum-likelihood fit, optionally restricted to the invertibility region.
    Fit,
    /// Evaluate the invertibility region and confidence sets on a 2-D grid.
    Region,
    /// Test whether the filter contracts at the given or fitted parameters.
    Test,
    /// Gap between two filters started from different initial values.
    Diverge,
    /// One table row per dataset: estimates, s.e., feasible and empirical conditions, p-value.
    Report,
}

#[derive(clap::Args, Clone)]
struct Flags {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Zero-based index or header name.
    #[arg(long, global = true)]
    column: Option<String>,
    #[arg(long, global = true)]
    transform: Option<Transform>,
    #[arg(long, global = true)]
    model: Option<ModelKind>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    bandwidth: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_starts: Option<usize>,
    #[arg(long, global = true)]
    constrained: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    let f = cli.flags;
    let mut cfg = match &f.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(Overrides {
        data: f.data,
        column: f.column,
        transform: f.transform,
        model: f.model,
        delta: f.delta,
        alpha: f.alpha,
        bandwidth: f.bandwidth,
        seed: f.seed,
        n_starts: f.n_starts,
        constrained: f.constrained,
        out: f.out,
    });
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Region => commands::region(&cfg),
        Command::Test => commands::test(&cfg),
        Command::Diverge => commands::diverge(&cfg),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("odm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
