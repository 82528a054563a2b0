use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lab::{diff_paths, load_config, run_scenarios, Checker};

#[derive(Parser)]
#[command(
    name = "lab",
    version,
    about = "Run inequality checkers from a scenario file"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config file.
    Run {
        config: PathBuf,
        /// Directory for the reports.
        #[arg(long, default_value = "lab-out")]
        out: PathBuf,
        /// Seed for scenarios that do not set one.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare a report (file or directory) against a golden.
    Diff { report: PathBuf, golden: PathBuf },
    /// List checkers and the keys they accept.
    ListCheckers,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
        } => {
            let scenarios = match load_config(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_scenarios(&scenarios, seed, jobs, &out) {
                Ok(s) if s.ok() => {
                    println!("{} rows, all as expected", s.rows);
                    ExitCode::SUCCESS
                }
                Ok(s) => {
                    println!("{} rows: {} failed, {} errors", s.rows, s.failed, s.errors);
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: writing {}: {e}", out.display());
                    ExitCode::from(2)
                }
            }
        }
        Command::Diff { report, golden } => match diff_paths(&report, &golden) {
            Ok(None) => {
                println!("reports agree");
                ExitCode::SUCCESS
            }
            Ok(Some(d)) => {
                println!("first divergence: {d}");
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::ListCheckers => {
            for c in Checker::ALL {
                println!("{:<28}{}", c.name(), c.about());
                let keys: Vec<&str> = c.keys().iter().map(|(k, _)| *k).collect();
                if !keys.is_empty() {
                    println!("{:<28}keys: {}", "", keys.join(", "));
                }
            }
            ExitCode::SUCCESS
        }
    }
}
