use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qreduce::{run_config_file, CliError, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(
    name = "qreduce",
    version,
    about = "Run reduction, decoherence and history scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV table and JSON summary.
    Run {
        config: PathBuf,
        /// Directory for relative output paths (default: current directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Print the available scenarios.
    ListScenarios,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out_dir, seed } => {
            let (written, outcome) = run_config_file(&config, out_dir.as_deref(), seed)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", written.csv.display());
            println!("wrote {}", written.json.display());
            if !outcome.contract_failures.is_empty() {
                return Err(CliError::Numerical(outcome.contract_failures.join("; ")));
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            println!("ok: {} (seed {})", cfg.kind(), cfg.seed);
            Ok(())
        }
        Command::ListScenarios => {
            for kind in ScenarioKind::ALL {
                println!("{:<20} {}", kind.name(), kind.summary());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
