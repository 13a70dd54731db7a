use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hyperfree_cli::config::ExperimentConfig;
use hyperfree_cli::{list_experiments, replay, run, ReplayOutcome};

const EXIT_USAGE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "hyperfree", version, about = "Run and replay hyperfree experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; overrides `out` in the config. Stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute every check of a report from its stored inputs.
    Replay {
        report: PathBuf,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List experiment kinds.
    ListExperiments,
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            cap,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(cap) = cap {
                cfg.cap = cap;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            let report = run(&cfg, jobs)?;
            let text = report.render();
            match out.or(cfg.out.clone()) {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            if report.complete() {
                eprintln!("{}: {} points", cfg.experiment.kind(), report.certificate.points.len());
                Ok(0)
            } else {
                eprintln!("{}: cap reached, report is partial", cfg.experiment.kind());
                Ok(EXIT_PARTIAL)
            }
        }
        Command::Replay { report, cap, jobs } => {
            let text = std::fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            match replay(&text, cap, jobs)? {
                ReplayOutcome::Verified { points } => {
                    println!("verified: {points} points");
                    Ok(0)
                }
                ReplayOutcome::Mismatch {
                    point,
                    check,
                    expected,
                    found,
                } => {
                    println!("mismatch at point {point}, check {check}");
                    println!("  recorded: {expected}");
                    println!("  replayed: {found}");
                    Ok(EXIT_MISMATCH)
                }
            }
        }
        Command::ListExperiments => {
            print!("{}", list_experiments());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
