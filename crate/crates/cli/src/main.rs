use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use r2po::EnvId;
use r2po_cli::commands;
use r2po_cli::config::{resolve, EnvOverrides, Overrides};

#[derive(Parser)]
#[command(name = "r2po", version, about = "Two-stage LLM policy search")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Subcommand)]
enum Verb {
    /// Run one seed and write its logs under --out
    Run,
    /// Run --seeds consecutive seeds starting at --seed
    Batch,
    /// Print per-run metrics from existing logs
    Analyze {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Write CSV tables for every run below a directory (to --out, default <logs>/report)
    Report { logs: PathBuf },
    /// Self-check environments (all when --env is absent)
    ValidateEnv,
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let cfg = resolve(&cli.flags, &EnvOverrides::from_process())?;
    match &cli.verb {
        Verb::Run => commands::cmd_run(&cfg),
        Verb::Batch => commands::cmd_batch(&cfg),
        Verb::Analyze { logs } => commands::cmd_analyze(logs),
        Verb::Report { logs } => commands::cmd_report(&cfg, logs, cli.flags.out.as_deref()),
        Verb::ValidateEnv => {
            let envs = cli
                .flags
                .env
                .map_or_else(|| EnvId::ALL.to_vec(), |e| vec![e]);
            commands::cmd_validate_env(&envs, cfg.run.rollouts, cfg.run.seed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
