use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use critchi_cli::pipeline::{run_scenario, run_sweep, RunOptions};
use critchi_cli::report::Outcome;
use critchi_cli::scenario::{parse_scenario, SweepScenario};

/// Counts critical points of products of powers of polynomials and
/// checks the counts against Euler characteristics computed without
/// solving anything.
#[derive(Parser)]
#[command(name = "critchi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and check every applicable identity.
    ///
    /// Exit code 0 when every identity passes, 1 on a failed identity
    /// or uncertified solve, 2 when the scenario cannot be run at all.
    Verify {
        /// Path to a TOML scenario file.
        scenario: PathBuf,
        /// Replace the scenario seed for this run.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the multistart oracle and require that it finds
        /// exactly the homotopy point set.
        #[arg(long)]
        oracle: bool,
        /// Emit the machine-readable JSON document instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Check the characteristic-class identities over a degree grid.
    SweepChern {
        /// Largest ambient dimension.
        #[arg(long = "max-dim", default_value_t = 4)]
        max_dim: usize,
        /// Largest component degree.
        #[arg(long = "max-deg", default_value_t = 4)]
        max_deg: u32,
        /// Largest number of divisor components.
        #[arg(long = "max-components", default_value_t = 5)]
        max_components: usize,
        /// Write the report to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the machine-readable JSON document instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Verify {
            scenario,
            seed,
            out,
            oracle,
            json,
        } => {
            let text = fs::read_to_string(&scenario)
                .map_err(|e| format!("cannot read {}: {e}", scenario.display()))?;
            let parsed = parse_scenario(&text).map_err(|e| e.to_string())?;
            let opts = RunOptions {
                seed_override: seed,
                with_oracle: oracle,
            };
            let outcome = run_scenario(&parsed, &opts).map_err(|e| e.to_string())?;
            emit(&outcome, json, out.as_deref())?;
            Ok(outcome.passed())
        }
        Command::SweepChern {
            max_dim,
            max_deg,
            max_components,
            out,
            json,
        } => {
            if max_dim == 0 || max_deg == 0 || max_components == 0 {
                return Err("sweep bounds must be at least 1".to_string());
            }
            let outcome = Outcome::Sweep(run_sweep(&SweepScenario {
                max_dimension: max_dim,
                max_degree: max_deg,
                max_components,
            }));
            emit(&outcome, json, out.as_deref())?;
            Ok(outcome.passed())
        }
    }
}

fn emit(outcome: &Outcome, json: bool, out: Option<&Path>) -> Result<(), String> {
    let body = outcome.render(json);
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
    }
}
