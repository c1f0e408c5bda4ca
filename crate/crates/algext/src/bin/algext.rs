//! Batch experiment runner for the algebraic-extractor harness.
//!
//! Exit codes: 0 all-pass, 1 any-fail, 2 infrastructure error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use algext::config::ExperimentConfig;
use algext::harness;

#[derive(Parser)]
#[command(name = "algext", version, about = "extractors for algebraic sources: experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its report.
    Run {
        /// Path to a key = value config file.
        config: PathBuf,
    },
    /// Replay a serialized extractor artifact against an input file.
    Replay {
        artifact: PathBuf,
        input: PathBuf,
        /// Write outputs here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a shipped suite: `smoke` or `full`.
    Suite { name: String },
    /// Corpus utilities.
    Corpus {
        #[command(subcommand)]
        sub: CorpusCmd,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// List the shipped corpus entries.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> algext::Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = harness::run(&cfg)?;
            let stem = config
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "experiment".into());
            let dir = cfg.output_dir.clone().unwrap_or_else(|| "out".into());
            std::fs::create_dir_all(&dir)?;
            let json_path = PathBuf::from(&dir).join(format!("{stem}-report.json"));
            let csv_path = PathBuf::from(&dir).join(format!("{stem}-rows.csv"));
            std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;
            std::fs::write(&csv_path, report.rows_csv())?;
            for row in &report.rows {
                println!(
                    "{} {} metric={} bound={} [{}]",
                    if row.pass { "PASS" } else { "FAIL" },
                    row.label,
                    row.metric,
                    row.bound,
                    row.mode
                );
            }
            println!(
                "{}: {} rows, report {} ({} ms)",
                if report.pass { "PASS" } else { "FAIL" },
                report.rows.len(),
                json_path.display(),
                report.wall_ms
            );
            Ok(report.pass)
        }
        Command::Replay { artifact, input, output } => {
            let out = harness::replay(&artifact, &input)?;
            match output {
                Some(path) => std::fs::write(path, out)?,
                None => print!("{out}"),
            }
            Ok(true)
        }
        Command::Suite { name } => {
            let outcome = harness::suite(&name)?;
            for (_, report) in &outcome.reports {
                println!(
                    "{} {} ({} rows, {} ms)",
                    if report.pass { "PASS" } else { "FAIL" },
                    report.experiment,
                    report.rows.len(),
                    report.wall_ms
                );
                if !report.pass {
                    for row in report.rows.iter().filter(|r| !r.pass) {
                        println!("  FAIL {} metric={} bound={}", row.label, row.metric, row.bound);
                    }
                }
            }
            println!("suite {name}: {}", if outcome.pass { "PASS" } else { "FAIL" });
            Ok(outcome.pass)
        }
        Command::Corpus { sub: CorpusCmd::List } => {
            print!("{}", harness::corpus_listing()?);
            Ok(true)
        }
    }
}
