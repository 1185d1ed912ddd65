use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use periodic_rl_cli::run::{execute, Mode};
use periodic_rl_cli::{load_config, report, CliError};

#[derive(Parser)]
#[command(name = "periodic-rl", version, about = "Learning in periodic Markov decision processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every configured algorithm over every seed.
    Run {
        config: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recompute and compare against an existing manifest without writing.
        #[arg(long)]
        verify: bool,
    },
    /// Evaluate the regret bounds, optionally against finished runs.
    BoundCheck {
        config: PathBuf,
        /// Output directory of a previous `run`.
        #[arg(long)]
        runs: Option<PathBuf>,
        /// Where to write bound_report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a model and print its summary.
    Validate { env: String },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run {
            config,
            jobs,
            out,
            verify,
        } => {
            let cfg = load_config(&config)?;
            let out = out
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            let mode = if verify { Mode::Verify } else { Mode::Write };
            let summary = execute(&cfg, &out, jobs, mode)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?);
            if verify {
                eprintln!("verified {} files", summary.files.len());
            }
            Ok(0)
        }
        Command::BoundCheck { config, runs, out } => {
            let cfg = load_config(&config)?;
            let check = report::bound_check(&cfg, runs.as_deref())?;
            let dir = out.or_else(|| runs.clone()).or_else(|| cfg.out.clone());
            if let Some(dir) = dir {
                report::write_bound_check(&check, Path::new(&dir))?;
            }
            print!("{}", check.render());
            Ok(if check.passed() { 0 } else { 1 })
        }
        Command::Validate { env } => {
            print!("{}", report::validate_env(&env)?);
            Ok(0)
        }
    }
}
