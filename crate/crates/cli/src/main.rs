use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod artifacts;
mod config;
mod pipeline;

use artifacts::RunDir;
use config::{ConfigError, ExperimentConfig};
use pipeline::RunError;

/// Freeze-thaw particle simulation and dynamic-test analysis.
#[derive(Parser)]
#[command(name = "frostdem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a packing and cool it through the configured stages.
    Freeze(RunArgs),
    /// Uniaxial compression, with calibration when targets are set.
    Compress(RunArgs),
    /// Energy, RDIF, fractal and T2 analysis of input files.
    Analyze(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run directory; overrides `[run] out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), RunError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        RunError::Config(ConfigError { line: 0, key: "--config".into(), reason: format!("{}: {e}", args.config.display()) })
    })?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let mut cfg = ExperimentConfig::from_text(&text, base)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| ConfigError { line: 0, key: "out".into(), reason: "give --out or [run] out".into() })?;
    Ok((cfg, out))
}

type Stage = fn(&ExperimentConfig, &mut RunDir) -> Result<(), RunError>;

fn run(cli: Cli) -> Result<PathBuf, RunError> {
    let (args, stage): (&RunArgs, Stage) = match &cli.command {
        Command::Freeze(a) => (a, pipeline::run_freeze_experiment),
        Command::Compress(a) => (a, pipeline::run_compression_experiment),
        Command::Analyze(a) => (a, pipeline::run_analysis),
    };
    let (cfg, out) = load(args)?;
    let mut dir = RunDir::create(&out)?;
    stage(&cfg, &mut dir)?;
    Ok(dir.finish()?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(dir) => {
            println!("{}", dir.join("manifest.txt").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
