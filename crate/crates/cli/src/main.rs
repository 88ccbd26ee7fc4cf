use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lqs_cli::{exit_code, run_analyze, run_du_check, run_synth, RunConfig};

#[derive(Parser)]
#[command(name = "lqs", version, about = "Local quasi-stationarity analysis of MIMO channels")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene into <out>/channel.ctf1.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the analysis chain and write curves, LQS tables and reports.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed of a synthetic input.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the doubly-underspread condition for rough scenario parameters.
    DuCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Synth { config, seed, out } => {
            let path = run_synth(&config, seed, &out)?;
            println!("{}", path.display());
        }
        Command::Analyze { config, seed, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let (Some(s), lqs_cli::InputSpec::Synth { seed, .. }) = (seed, &mut cfg.input) {
                *seed = s;
            }
            let dir = run_analyze(&cfg, out.as_deref())?;
            println!("{}", dir.display());
        }
        Command::DuCheck { config, out } => {
            let (_, bytes) = run_du_check(&config)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("du_report.json"), &bytes)?;
            }
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
