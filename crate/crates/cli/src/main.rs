use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use molar_cli::commands;
use molar_cli::config::{ExperimentConfig, SeedSpec};
use molar_cli::error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "molar",
    version,
    about = "Multitask estimation and bandit experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, clap::Args)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the configured seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count for the sweep.
    #[arg(long)]
    workers: Option<usize>,
    /// Output format; only `csv` is supported.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic multitask regression sweeps.
    Regress(CommonArgs),
    /// Asynchronous contextual-bandit simulations.
    Bandit(CommonArgs),
    /// Noiseless high-dimensional recovery sweeps.
    Recover(CommonArgs),
    /// Tabular preprocessing pipeline.
    Ingest(CommonArgs),
    /// Coefficient tuning on validation data.
    Tune(CommonArgs),
}

fn load(args: &CommonArgs) -> Result<ExperimentConfig> {
    if args.format != "csv" {
        return Err(CliError::Config(format!(
            "unsupported format {:?}; only csv is available",
            args.format
        )));
    }
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        config.seeds = SeedSpec::List(vec![seed]);
    }
    if let Some(workers) = args.workers {
        config.workers = Some(workers);
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Regress(args) => {
            let config = load(args)?;
            let outputs = commands::regress(&config, args.out.as_deref())?;
            for p in outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Bandit(args) => {
            let config = load(args)?;
            let outputs = commands::bandit(&config, args.out.as_deref())?;
            for p in outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Recover(args) => {
            let config = load(args)?;
            let outputs = commands::recover(&config, args.out.as_deref())?;
            for p in outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Ingest(args) => {
            let config = load(args)?;
            let outputs = commands::ingest(&config, args.out.as_deref())?;
            for p in outputs {
                println!("wrote {}", p.display());
            }
        }
        Command::Tune(args) => {
            let config = load(args)?;
            let (outputs, chosen) = commands::tune(&config, args.out.as_deref())?;
            println!("chosen coefficient: {chosen}");
            for p in outputs {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
