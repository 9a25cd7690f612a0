//! `iwal`: run active learning experiments, tabulate bounds and run the
//! validation suites.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{C0Setting, ConfigError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "iwal", version, about = "Importance-weighted active learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed and write traces, samples and a summary.
    Run(ConfigArgs),
    /// Compare measured query counts and errors with the bounds.
    Bounds(ConfigArgs),
    /// Run a validation suite (or `all`).
    Validate {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the reports as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment file (TOML, or JSON with a .json extension).
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// A number or `auto`.
    #[arg(long)]
    c0: Option<C0Setting>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
}

impl ConfigArgs {
    fn resolve(self) -> Result<config::Resolved, ConfigError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        cfg.apply(Overrides {
            rounds: self.rounds,
            checkpoints: self.checkpoints,
            seeds: self.seeds,
            output_dir: self.output_dir,
            c0: self.c0,
            delta: self.delta,
            horizon: self.horizon,
        });
        cfg.resolve()
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let r = args.resolve()?;
            let s = commands::run(&r)?;
            for c in &s.checkpoints {
                println!("n={:>8} median queries {:>10.1} median excess {:.4}", c.n, c.median_queries, c.median_excess);
            }
            println!("wrote {} runs to {}", s.runs.len(), r.config.output_dir.display());
            Ok(true)
        }
        Command::Bounds(args) => {
            let r = args.resolve()?;
            let b = commands::bounds(&r)?;
            println!(
                "theta = {:.4}, err* = {:.4}, C0 = {:.4}, fit a = {:.4}, b = {:.4}",
                b.theta, b.err_star, b.c0, b.fit_a, b.fit_b
            );
            for row in &b.rows {
                println!(
                    "n={:>8} queries {:>10.1} strict {:>12.1} fitted {:>10.1} excess {:.4} <= {:.4}",
                    row.n,
                    row.measured_queries,
                    row.label_complexity_strict,
                    row.label_complexity_fitted,
                    row.median_excess,
                    row.consistency_bound
                );
            }
            println!("wrote bounds.csv and bounds.json to {}", r.config.output_dir.display());
            Ok(b.passed)
        }
        Command::Validate { suite, seed, report } => {
            let reports = commands::validate(&suite, seed, report.as_ref())?;
            for r in &reports {
                for c in &r.checks {
                    println!("{} {}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, r.suite, c.name, c.detail);
                }
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
