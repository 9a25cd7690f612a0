//! The `run`, `bounds` and `validate` subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use iwal_core::analysis::validation::{run_suite, SuiteReport, SUITES};
use iwal_core::analysis::{
    consistency_bound, disagreement_coefficient, fit_two_term, label_complexity_fitted, label_complexity_strict_curve,
};
use iwal_core::experiment::{summarize, CheckpointSummary, ErrorTable, ExperimentSpec, SeedOutcome};
use iwal_core::{ThresholdConfig, ThresholdMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, Resolved};

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub threshold: ThresholdConfig,
    pub horizon: usize,
    pub rounds: usize,
    pub class_size: usize,
    pub best_hypothesis: usize,
    pub best_error: f64,
    pub exact_errors: bool,
    pub checkpoints: Vec<CheckpointSummary>,
    pub runs: Vec<SeedOutcome>,
}

fn spec(r: &Resolved) -> ExperimentSpec<'_> {
    ExperimentSpec {
        dist: &r.config.stream,
        class: &r.class,
        config: r.threshold,
        rounds: r.config.rounds,
        checkpoints: r.config.checkpoints.clone(),
        passive: r.config.passive,
        inspect_rounds: true,
    }
}

fn warn_past_horizon(r: &Resolved) {
    if r.config.rounds > r.horizon {
        eprintln!("warning: {} rounds exceed the horizon {} over which C0 was checked", r.config.rounds, r.horizon);
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn summary(r: &Resolved, table: &ErrorTable, runs: Vec<SeedOutcome>) -> RunSummary {
    RunSummary {
        threshold: r.threshold,
        horizon: r.horizon,
        rounds: r.config.rounds,
        class_size: r.class.len(),
        best_hypothesis: table.best,
        best_error: table.best_error,
        exact_errors: table.exact,
        checkpoints: summarize(&runs),
        runs,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Runs every seed and writes `trace_seed<s>.jsonl`, `sample_seed<s>.csv`
/// and `summary.json` into the output directory.
pub fn run(r: &Resolved) -> Result<RunSummary> {
    warn_past_horizon(r);
    let table = ErrorTable::new(&r.class, &r.config.stream)?;
    let spec = spec(r);
    let results = r.config.seeds.par_iter().map(|&s| spec.run_one(&table, s)).collect::<iwal_core::Result<Vec<_>>>()?;

    let dir = &r.config.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut outcomes = Vec::with_capacity(results.len());
    for (outcome, trace, sample) in results {
        let mut w = create(&dir.join(format!("trace_seed{}.jsonl", outcome.seed)))?;
        trace.write_jsonl(&mut w)?;
        w.flush()?;
        let mut w = create(&dir.join(format!("sample_seed{}.csv", outcome.seed)))?;
        sample.write_csv(&mut w)?;
        w.flush()?;
        outcomes.push(outcome);
    }
    let summary = summary(r, &table, outcomes);
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub measured_queries: f64,
    pub mean_queries: f64,
    pub window_rate: f64,
    pub median_excess: f64,
    pub consistency_bound: f64,
    pub label_complexity_strict: f64,
    pub label_complexity_fitted: f64,
    pub consistency_holds: bool,
    pub strict_holds: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundsReport {
    pub theta: f64,
    pub err_star: f64,
    pub c0: f64,
    pub mode: ThresholdMode,
    pub fit_a: f64,
    pub fit_b: f64,
    pub calibrate_through: usize,
    pub rows: Vec<BoundsRow>,
    /// Only analysis-mode runs carry guarantees; experimental runs always pass.
    pub passed: bool,
}

/// Tabulates the consistency and label-complexity bounds against the
/// measured medians and writes `bounds.csv` and `bounds.json`.
pub fn bounds(r: &Resolved) -> Result<BoundsReport> {
    warn_past_horizon(r);
    let table = ErrorTable::new(&r.class, &r.config.stream)?;
    let summary = summarize(&spec(r).run_many(&table, &r.config.seeds)?);
    let profile = disagreement_coefficient(&r.class, &r.config.stream, table.best, &[1.0])?;
    let theta = profile.theta_sup;
    let err_star = table.best_error;
    let c0 = r.threshold.c0;

    let ns: Vec<usize> = summary.iter().map(|s| s.n).collect();
    let calibrate_through = r.config.bounds.calibrate_through.unwrap_or(ns[(ns.len() - 1) / 2]);
    let (fit_a, fit_b) = {
        let (xs, ys): (Vec<f64>, Vec<f64>) = summary
            .iter()
            .filter(|s| s.n <= calibrate_through && s.n > 1)
            .map(|s| (s.n as f64, s.median_queries - 1.0 - theta * 2.0 * err_star * (s.n - 1) as f64))
            .unzip();
        if theta == 0.0 || xs.is_empty() {
            (0.0, 0.0)
        } else {
            fit_two_term(&xs, &ys, |n| theta * (c0 * n * n.ln()).sqrt(), |n| theta * c0 * n.ln().powi(3))?
        }
    };

    let strict = label_complexity_strict_curve(theta, err_star, c0, &ns, &r.threshold.constants);
    let rows: Vec<BoundsRow> = summary
        .iter()
        .zip(&strict)
        .map(|(s, &strict)| {
            let consistency = consistency_bound(c0, s.n);
            BoundsRow {
                n: s.n,
                measured_queries: s.median_queries,
                mean_queries: s.mean_queries,
                window_rate: s.window_rate,
                median_excess: s.median_excess,
                consistency_bound: consistency,
                label_complexity_strict: strict,
                label_complexity_fitted: label_complexity_fitted(theta, err_star, c0, s.n, fit_a, fit_b),
                consistency_holds: s.median_excess <= consistency,
                strict_holds: s.mean_queries <= strict,
            }
        })
        .collect();
    let passed = r.threshold.mode == ThresholdMode::Experimental
        || rows.iter().all(|row| row.consistency_holds && row.strict_holds);
    let report =
        BoundsReport { theta, err_star, c0, mode: r.threshold.mode, fit_a, fit_b, calibrate_through, rows, passed };

    let dir = &r.config.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = create(&dir.join("bounds.csv"))?;
    writeln!(w, "n,measured_queries,mean_queries,window_rate,median_excess,consistency_bound,label_complexity_strict,label_complexity_fitted")?;
    for row in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.n,
            row.measured_queries,
            row.mean_queries,
            row.window_rate,
            row.median_excess,
            row.consistency_bound,
            row.label_complexity_strict,
            row.label_complexity_fitted
        )?;
    }
    w.flush()?;
    write_json(&dir.join("bounds.json"), &report)?;
    Ok(report)
}

/// Runs one suite, or all of them for `"all"`.
pub fn validate(name: &str, seed: u64, report: Option<&PathBuf>) -> Result<Vec<SuiteReport>> {
    let names: Vec<&str> = match name {
        "all" => SUITES.to_vec(),
        n if SUITES.contains(&n) => vec![n],
        other => {
            return Err(
                ConfigError::Invalid(format!("unknown suite {other:?}; expected all or one of {SUITES:?}")).into()
            )
        }
    };
    let reports = names.iter().map(|n| run_suite(n, seed)).collect::<iwal_core::Result<Vec<_>>>()?;
    if let Some(path) = report {
        write_json(path, &reports)?;
    }
    Ok(reports)
}
