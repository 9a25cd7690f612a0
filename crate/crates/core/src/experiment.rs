//! Multi-seed experiments: run the active learner (and optionally the
//! passive comparator) on independent streams and reduce each run to the
//! quantities the analysis checks.
//!
//! Seeds are processed in parallel; each run owns its streams and RNGs and
//! results are returned in seed order, so output does not depend on
//! scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{passive_baseline, Engine, RunTrace, TraceMode};
use crate::error::{Error, Result};
use crate::hypothesis::HypothesisClass;
use crate::sample::WeightedSample;
use crate::stream::{draw_stream, DataDistribution};
use crate::threshold::ThresholdConfig;

/// Samples used per hypothesis when the error has no exact form.
pub const MONTE_CARLO_ERROR_SAMPLES: usize = 1_000_000;

/// Mixed into the run seed to obtain the coin seed.
const COIN_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream and coin seeds for run `seed`.
pub fn run_seeds(seed: u64) -> (u64, u64) {
    (seed, seed ^ COIN_SALT)
}

/// True error of every hypothesis in a class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub errors: Vec<f64>,
    pub best: usize,
    pub best_error: f64,
    /// False when the errors are Monte Carlo estimates.
    pub exact: bool,
    /// Standard error of each estimate; zero for exact errors.
    pub standard_errors: Vec<f64>,
}

impl ErrorTable {
    pub fn new(class: &HypothesisClass, dist: &DataDistribution) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        let (errors, standard_errors, exact) =
            match class.iter().map(|h| dist.exact_error(&h.form)).collect::<Result<Vec<_>>>() {
                Ok(errors) => (errors, vec![0.0; class.len()], true),
                Err(Error::NoExactExpectation(_)) => {
                    let estimates = class
                        .iter()
                        .map(|h| dist.monte_carlo_error(&h.form, MONTE_CARLO_ERROR_SAMPLES, h.id as u64))
                        .collect::<Result<Vec<_>>>()?;
                    let (errors, ses) = estimates.into_iter().unzip();
                    (errors, ses, false)
                }
                Err(e) => return Err(e),
            };
        let mut best = 0;
        for (i, &e) in errors.iter().enumerate() {
            if e < errors[best] {
                best = i;
            }
        }
        Ok(Self { best_error: errors[best], best, errors, exact, standard_errors })
    }

    pub fn excess(&self, id: usize) -> f64 {
        self.errors[id] - self.best_error
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec<'a> {
    pub dist: &'a DataDistribution,
    pub class: &'a HypothesisClass,
    pub config: ThresholdConfig,
    pub rounds: usize,
    /// Sorted checkpoints, each at most `rounds`.
    pub checkpoints: Vec<usize>,
    /// Also run the passive comparator on the same stream.
    pub passive: bool,
    /// Keep per-round records so that the query probabilities can be
    /// inspected; otherwise only counters are kept.
    pub inspect_rounds: bool,
}

/// Measurements at one checkpoint of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointOutcome {
    pub n: usize,
    pub queries: usize,
    /// Queries among the last `window` rounds up to `n`.
    pub window_queries: usize,
    pub window: usize,
    /// Excess error of the leader `h_n` used in round `n`.
    pub leader_excess: f64,
    /// Excess error of the minimizer on `S_n`.
    pub excess: f64,
    pub passive_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub checkpoints: Vec<CheckpointOutcome>,
    pub queries: usize,
    pub final_hypothesis: usize,
    pub final_error: f64,
    pub passive_final_error: Option<f64>,
    pub degenerate_rounds: usize,
    /// Smallest `P_i` over rounds where the final hypothesis disagrees with
    /// `h*` at `X_i`; `Some(1.0)` if there are none, `None` without per-round records.
    pub min_p_on_disagreement: Option<f64>,
}

/// Width of the averaging window that ends at checkpoint `n`.
pub fn window_for(n: usize) -> usize {
    (n / 10).max(1)
}

impl<'a> ExperimentSpec<'a> {
    fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be positive".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("checkpoints must be strictly increasing".into()));
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| c == 0 || c > self.rounds) {
            return Err(Error::InvalidParameter(format!("checkpoint {c} outside 1..={}", self.rounds)));
        }
        self.class.require_learnable()
    }

    /// Runs one seed and returns the full trace and sample as well as the reduction.
    pub fn run_one(&self, table: &ErrorTable, seed: u64) -> Result<(SeedOutcome, RunTrace, WeightedSample)> {
        self.validate()?;
        let (stream_seed, coin_seed) = run_seeds(seed);
        let mut stream = draw_stream(self.dist, self.rounds, stream_seed)?;
        let mode = if self.inspect_rounds { TraceMode::Full } else { TraceMode::Counters };
        let engine = Engine::new(self.class, self.config, coin_seed)?;
        let windows: Vec<usize> = self.checkpoints.iter().map(|&n| n - window_for(n)).collect();
        let mut probes: Vec<usize> = self.checkpoints.iter().chain(&windows).copied().filter(|&n| n > 0).collect();
        probes.sort_unstable();
        probes.dedup();
        let (mut trace, sample) = engine.run(&mut stream, self.rounds, &probes, mode)?;

        let passive = if self.passive {
            let mut again = draw_stream(self.dist, self.rounds, stream_seed)?;
            Some(passive_baseline(&mut again, self.class, self.rounds, &self.checkpoints)?)
        } else {
            None
        };

        let queries_at = |n: usize| trace.checkpoints.iter().find(|c| c.n == n).map_or(0, |c| c.queries);
        let mut outcomes = Vec::with_capacity(self.checkpoints.len());
        for &n in &self.checkpoints {
            let snap = trace.checkpoints.iter().find(|c| c.n == n).expect("checkpoint recorded");
            let w = window_for(n);
            outcomes.push(CheckpointOutcome {
                n,
                queries: snap.queries,
                window_queries: snap.queries - queries_at(n - w),
                window: w,
                leader_excess: table.excess(snap.leader),
                excess: table.excess(snap.current),
                passive_excess: passive
                    .as_ref()
                    .and_then(|p| p.curve.iter().find(|(m, _)| *m == n))
                    .map(|&(_, id)| table.excess(id)),
            });
        }

        let min_p = if self.inspect_rounds {
            let fin = self.class.get(trace.final_hypothesis)?;
            let star = self.class.get(table.best)?;
            let mut m = 1.0f64;
            for r in &trace.rounds {
                let x = r.x.as_ref().expect("full trace keeps points");
                if fin.evaluate(x)? != star.evaluate(x)? {
                    m = m.min(r.p);
                }
            }
            Some(m)
        } else {
            None
        };
        trace.checkpoints.retain(|c| self.checkpoints.contains(&c.n));

        let outcome = SeedOutcome {
            seed,
            checkpoints: outcomes,
            queries: trace.queries,
            final_hypothesis: trace.final_hypothesis,
            final_error: table.errors[trace.final_hypothesis],
            passive_final_error: passive.map(|p| table.errors[p.final_hypothesis]),
            degenerate_rounds: trace.degenerate_rounds,
            min_p_on_disagreement: min_p,
        };
        Ok((outcome, trace, sample))
    }

    /// Runs every seed in parallel; results come back in the order of `seeds`.
    pub fn run_many(&self, table: &ErrorTable, seeds: &[u64]) -> Result<Vec<SeedOutcome>> {
        self.validate()?;
        seeds.par_iter().map(|&s| self.run_one(table, s).map(|(o, _, _)| o)).collect()
    }
}

/// Per-checkpoint medians across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointSummary {
    pub n: usize,
    pub median_queries: f64,
    pub mean_queries: f64,
    /// Mean over seeds of the per-round query rate in the window ending at `n`.
    pub window_rate: f64,
    pub median_excess: f64,
    pub mean_excess: f64,
    pub median_passive_excess: Option<f64>,
}

pub fn summarize(outcomes: &[SeedOutcome]) -> Vec<CheckpointSummary> {
    use crate::analysis::median;
    let Some(first) = outcomes.first() else { return Vec::new() };
    let runs = outcomes.len() as f64;
    (0..first.checkpoints.len())
        .map(|i| {
            let at: Vec<&CheckpointOutcome> = outcomes.iter().map(|o| &o.checkpoints[i]).collect();
            let q: Vec<f64> = at.iter().map(|c| c.queries as f64).collect();
            let e: Vec<f64> = at.iter().map(|c| c.excess).collect();
            let pe: Option<Vec<f64>> = at.iter().map(|c| c.passive_excess).collect();
            CheckpointSummary {
                n: at[0].n,
                median_queries: median(&q),
                mean_queries: q.iter().sum::<f64>() / runs,
                window_rate: at.iter().map(|c| c.window_queries as f64 / c.window as f64).sum::<f64>() / runs,
                median_excess: median(&e),
                mean_excess: e.iter().sum::<f64>() / runs,
                median_passive_excess: pe.map(|v| median(&v)),
            }
        })
        .collect()
}
