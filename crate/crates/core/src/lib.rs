//! Importance-weighted active learning over finite hypothesis classes.
//!
//! The learner in [`engine`] reads a stream of unlabeled points, decides for
//! each one with an explicit probability whether to pay for its label, and
//! keeps the queried examples with weight `1/P` so that importance-weighted
//! error estimates stay unbiased. [`analysis`] evaluates the accompanying
//! deviation, consistency and label-complexity bounds, and [`stream`]
//! generates synthetic data on which all of them can be checked exactly.

// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod hypothesis;
pub mod sample;
pub mod stream;
pub mod threshold;

pub use engine::{passive_baseline, run, Engine, PassiveRun, RoundRecord, RunTrace, TraceMode};
pub use error::{Error, Result};
pub use hypothesis::{
    erm, erm_with_disagreement, true_error, ClassSpec, ErmOracle, ExhaustiveOracle, Hypothesis, HypothesisClass,
    HypothesisForm, IncrementalOracle, Label, Point,
};
pub use sample::{weighted_error, weighted_mean, InteractionRecord, WeightedExample, WeightedSample};
pub use stream::{draw_stream, DataDistribution, HiddenLabel, LabeledStream, Labeler, Marginal, SyntheticStream};
pub use threshold::{query_probability, solve_root, Constants, ThresholdConfig, ThresholdMode};
