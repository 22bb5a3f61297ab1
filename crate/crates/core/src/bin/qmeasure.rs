use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmeasure::cli::{list_presets, run_command, verify, CliError, OutputFormat, VerifyConfig, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "qmeasure", version, about = "Measurement-scheme scenarios and property checks")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a built-in preset by name).
    Run {
        file: String,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Run the randomized invariant batteries.
    Verify {
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..))]
        dims_limit: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// List built-in scenarios, states and observables.
    Presets,
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Run { file, format } => run_command(&file, format),
        Command::Verify { trials, dims_limit, seed } => {
            let summary = verify(VerifyConfig { trials: trials as usize, dims_limit: dims_limit as usize, seed })?;
            let text = summary.render();
            if summary.passed() {
                Ok(text)
            } else {
                print!("{text}");
                let failing: Vec<_> = summary
                    .batteries
                    .iter()
                    .filter(|b| !b.passed())
                    .map(|b| b.name)
                    .collect();
                Err(CliError::Property(format!("{} (rerun with --seed {seed})", failing.join(", "))))
            }
        }
        Command::Presets => Ok(list_presets()),
    }
}

fn main() -> ExitCode {
    match execute(Args::parse().command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
