use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use torwalk::cli::{run_batch, schema, verify, Report};

#[derive(Parser)]
#[command(name = "torwalk", version, about = "Run and verify torus random-walk experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiment configs and write reports.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed in every config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a report against a suite of criteria.
    Verify {
        report: PathBuf,
        #[arg(long, default_value = "acceptance")]
        suite: String,
    },
    /// Print the config and report formats.
    Schema,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Args::parse().command {
        Command::Run { configs, out, seed } => {
            let mut ok = true;
            for (path, result) in configs.iter().zip(run_batch(&configs, &out, seed)) {
                match result {
                    Ok(report) => println!("{} -> {}", path.display(), report.display()),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        ok = false;
                    }
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Verify { report, suite } => {
            let results = Report::load(&report).and_then(|r| verify(&r, &suite));
            match results {
                Ok(results) => {
                    for r in &results {
                        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.criterion, r.detail);
                    }
                    if results.iter().all(|r| r.passed) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("{}: {e}", report.display());
                    ExitCode::from(2)
                }
            }
        }
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&schema()).expect("schema serializes"));
            ExitCode::SUCCESS
        }
    }
}
