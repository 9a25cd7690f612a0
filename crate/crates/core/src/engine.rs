//! The streaming importance-weighted active learner.
//!
//! Each round: fit the leader `h_k` on `S_{k−1}`, fit the best hypothesis
//! disagreeing with it at `X_k`, turn their weighted-error gap into a query
//! probability, toss the coin, and only on heads open the label handle and
//! append `(X_k, Y_k, 1/P_k)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{ErmOracle, ExhaustiveOracle, HypothesisClass, IncrementalOracle, Label, Point};
use crate::sample::{InteractionRecord, WeightedSample};
use crate::stream::{HiddenLabel, LabeledStream};
use crate::threshold::{query_probability, Gap, ThresholdConfig, ThresholdInputs};

/// One round of the audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub k: usize,
    /// `None` for a degenerate round (the class agrees at the point).
    #[serde(rename = "G")]
    pub gap: Option<f64>,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub queried: bool,
    pub queries_so_far: usize,
    #[serde(skip)]
    pub x: Option<Point>,
    /// Present only when the label was queried.
    #[serde(skip)]
    pub y: Option<Label>,
    /// Id of the leader `h_k` fitted on `S_{k−1}`.
    #[serde(skip)]
    pub leader: usize,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    pub final_hypothesis: usize,
    pub queries: usize,
    pub degenerate_rounds: usize,
    pub checkpoints: Vec<Checkpoint>,
}

/// Snapshot taken after round `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    /// Leader `h_n` used in round `n` (fitted on `S_{n−1}`).
    pub leader: usize,
    /// Minimizer on `S_n`, i.e. what the learner would return now.
    pub current: usize,
    pub queries: usize,
}

impl RunTrace {
    /// Interaction records `Z_1..Z_n`; requires a full trace.
    pub fn interaction_records(&self) -> Result<Vec<InteractionRecord>> {
        self.rounds
            .iter()
            .map(|r| {
                let x =
                    r.x.clone().ok_or_else(|| Error::InvalidParameter("trace was recorded without points".into()))?;
                match r.y {
                    Some(y) => InteractionRecord::queried(x, r.p, y),
                    None => InteractionRecord::skipped(x, r.p),
                }
            })
            .collect()
    }

    /// JSON lines `{k, G, P, Q, queries_so_far}`, one per round.
    pub fn write_jsonl<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut writer, r)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// Keep every round record including the point.
    #[default]
    Full,
    /// Keep only the sample, counters and checkpoints.
    Counters,
}

/// Learner state between rounds.
pub struct Engine<'c, O: ErmOracle = IncrementalOracle> {
    class: &'c HypothesisClass,
    config: ThresholdConfig,
    oracle: O,
    sample: WeightedSample,
    coins: ChaCha8Rng,
    seed: u64,
    queries: usize,
    degenerate_rounds: usize,
}

impl<'c> Engine<'c, IncrementalOracle> {
    pub fn new(class: &'c HypothesisClass, config: ThresholdConfig, seed: u64) -> Result<Self> {
        Self::with_oracle(class, config, seed, IncrementalOracle::new(class))
    }
}

impl<'c> Engine<'c, ExhaustiveOracle> {
    pub fn exhaustive(class: &'c HypothesisClass, config: ThresholdConfig, seed: u64) -> Result<Self> {
        Self::with_oracle(class, config, seed, ExhaustiveOracle)
    }
}

impl<'c, O: ErmOracle> Engine<'c, O> {
    pub fn with_oracle(class: &'c HypothesisClass, config: ThresholdConfig, seed: u64, oracle: O) -> Result<Self> {
        class.require_learnable()?;
        Ok(Self {
            class,
            config,
            oracle,
            sample: WeightedSample::new(),
            coins: ChaCha8Rng::seed_from_u64(seed),
            seed,
            queries: 0,
            degenerate_rounds: 0,
        })
    }

    pub fn sample(&self) -> &WeightedSample {
        &self.sample
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn degenerate_rounds(&self) -> usize {
        self.degenerate_rounds
    }

    /// Current empirical minimizer on `S_k`.
    pub fn current_hypothesis(&self) -> Result<usize> {
        Ok(self.oracle.erm(self.class, &self.sample)?.id)
    }

    /// Processes one point. The probability is fixed before the coin is
    /// tossed and the label handle is opened only on heads.
    pub fn step(&mut self, x: Point, label: HiddenLabel) -> Result<RoundRecord> {
        let k = self.sample.round_count() + 1;
        let leader = self.oracle.erm(self.class, &self.sample)?;
        let leader_label = self.class.get(leader.id)?.evaluate(&x)?;
        let gap = match self.oracle.erm_with_disagreement(self.class, &self.sample, &x, leader_label)? {
            None => Gap::Degenerate,
            Some(_) if k == 1 => Gap::Finite(0.0),
            Some(alt) => Gap::Finite((alt.loss - leader.loss) / (k - 1) as f64),
        };
        if gap == Gap::Degenerate {
            self.degenerate_rounds += 1;
        }
        let p = query_probability(&self.config, ThresholdInputs { k, gap });
        let heads = self.coins.gen::<f64>() < p;
        let y = if heads {
            let y = label.reveal();
            self.queries += 1;
            let example = self
                .sample
                .record_round(Some((x.clone(), y, 1.0 / p)))?
                .expect("queried round stores an example")
                .clone();
            self.oracle.observe(self.class, &example)?;
            Some(y)
        } else {
            self.sample.record_round(None)?;
            None
        };
        Ok(RoundRecord {
            k,
            gap: match gap {
                Gap::Finite(g) => Some(g),
                Gap::Degenerate => None,
            },
            p,
            queried: heads,
            queries_so_far: self.queries,
            x: Some(x),
            y,
            leader: leader.id,
        })
    }

    /// Runs `n` rounds from `stream`, snapshotting at `checkpoints`.
    pub fn run<S: LabeledStream>(
        mut self,
        stream: &mut S,
        n: usize,
        checkpoints: &[usize],
        mode: TraceMode,
    ) -> Result<(RunTrace, WeightedSample)> {
        if n == 0 {
            return Err(Error::InvalidParameter("a run needs at least one round".into()));
        }
        let mut rounds = Vec::new();
        let mut snaps = Vec::new();
        for _ in 0..n {
            let (x, label) = stream.next_round().ok_or(Error::EndOfStream(self.sample.round_count()))?;
            let mut record = self.step(x, label)?;
            if checkpoints.contains(&record.k) {
                snaps.push(Checkpoint {
                    n: record.k,
                    leader: record.leader,
                    current: self.current_hypothesis()?,
                    queries: self.queries,
                });
            }
            if mode == TraceMode::Full {
                rounds.push(record);
            } else {
                record.x = None;
            }
        }
        let trace = RunTrace {
            seed: self.seed,
            rounds,
            final_hypothesis: self.current_hypothesis()?,
            queries: self.queries,
            degenerate_rounds: self.degenerate_rounds,
            checkpoints: snaps,
        };
        Ok((trace, self.sample))
    }
}

/// Runs the active learner for `n` rounds with the incremental oracle.
pub fn run<S: LabeledStream>(
    stream: &mut S,
    class: &HypothesisClass,
    config: ThresholdConfig,
    n: usize,
    seed: u64,
) -> Result<(RunTrace, WeightedSample)> {
    Engine::new(class, config, seed)?.run(stream, n, &[], TraceMode::Full)
}

/// Passive comparator: queries every label and refits by plain ERM.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveRun {
    pub final_hypothesis: usize,
    pub queries: usize,
    /// `(n, empirical minimizer after n labels)` at the requested checkpoints.
    pub curve: Vec<(usize, usize)>,
}

pub fn passive_baseline<S: LabeledStream>(
    stream: &mut S,
    class: &HypothesisClass,
    n: usize,
    checkpoints: &[usize],
) -> Result<PassiveRun> {
    let mut oracle = IncrementalOracle::new(class);
    let mut sample = WeightedSample::new();
    let mut curve = Vec::new();
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    for round in 1..=n {
        let (x, label) = stream.next_round().ok_or(Error::EndOfStream(round - 1))?;
        let y = label.reveal();
        let example = sample.record_round(Some((x, y, 1.0)))?.expect("passive rounds always store").clone();
        oracle.observe(class, &example)?;
        if checkpoints.contains(&round) {
            curve.push((round, oracle.erm(class, &sample)?.id));
        }
    }
    Ok(PassiveRun { final_hypothesis: oracle.erm(class, &sample)?.id, queries: n, curve })
}
