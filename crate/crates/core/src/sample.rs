//! Importance-weighted samples and estimators.
//!
//! A [`WeightedSample`] stores only the queried examples, but it also counts
//! every round the learner has seen: the importance-weighted error divides by
//! the number of rounds, not by the number of stored examples.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Label, Point};

/// A queried example with importance weight `1/P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedExample {
    /// 1-based round in which the label was queried.
    pub round: usize,
    pub x: Point,
    pub y: Label,
    pub weight: f64,
}

/// Append-only importance-weighted sample `S_n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedSample {
    examples: Vec<WeightedExample>,
    round_count: usize,
}

impl WeightedSample {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn examples(&self) -> &[WeightedExample] {
        &self.examples
    }

    pub fn round_count(&self) -> usize {
        self.round_count
    }

    /// Closes one round. `queried` carries `(x, y, weight)` when the label was
    /// requested; the new example is returned.
    pub fn record_round(&mut self, queried: Option<(Point, Label, f64)>) -> Result<Option<&WeightedExample>> {
        if let Some((_, _, weight)) = &queried {
            if !weight.is_finite() || *weight < 1.0 {
                return Err(Error::InvalidWeight(*weight));
            }
        }
        self.round_count += 1;
        match queried {
            Some((x, y, weight)) => {
                self.examples.push(WeightedExample { round: self.round_count, x, y, weight });
                Ok(self.examples.last())
            }
            None => Ok(None),
        }
    }

    /// Writes `round,x0..x{d-1},y,weight` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let dim = self.examples.first().map_or(1, |e| e.x.dim());
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["round".to_string()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        header.push("y".into());
        header.push("weight".into());
        out.write_record(&header)?;
        for ex in &self.examples {
            let mut row = vec![ex.round.to_string()];
            row.extend(ex.x.coords().iter().map(|c| c.to_string()));
            row.push(ex.y.as_i8().to_string());
            row.push(ex.weight.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a sample written by [`WeightedSample::write_csv`]. The round
    /// count is the larger of `rounds` and the last recorded round.
    pub fn read_csv<R: Read>(reader: R, rounds: usize) -> Result<Self> {
        let mut input = csv::Reader::from_reader(reader);
        let width = input.headers()?.len();
        if width < 4 {
            return Err(Error::InvalidParameter("sample csv needs round, x.., y, weight columns".into()));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("{s:?}: {e}")));
        let mut examples = Vec::new();
        for row in input.records() {
            let row = row?;
            let round = row[0].trim().parse::<usize>().map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let coords = (1..width - 2).map(|i| parse(&row[i])).collect::<Result<Vec<_>>>()?;
            let y = Label::from_i64(parse(&row[width - 2])? as i64)?;
            let weight = parse(&row[width - 1])?;
            if !weight.is_finite() || weight < 1.0 {
                return Err(Error::InvalidWeight(weight));
            }
            examples.push(WeightedExample { round, x: Point::new(coords)?, y, weight });
        }
        let last = examples.last().map_or(0, |e| e.round);
        Ok(Self { examples, round_count: rounds.max(last) })
    }
}

/// Per-round interaction `Z_i`: the point, its query probability and the
/// label, which exists only if the label was queried.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    x: Point,
    p: f64,
    label: Option<Label>,
}

impl InteractionRecord {
    pub fn queried(x: Point, p: f64, y: Label) -> Result<Self> {
        Self::build(x, p, Some(y))
    }

    pub fn skipped(x: Point, p: f64) -> Result<Self> {
        Self::build(x, p, None)
    }

    fn build(x: Point, p: f64, label: Option<Label>) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self { x, p, label })
    }

    pub fn x(&self) -> &Point {
        &self.x
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_queried(&self) -> bool {
        self.label.is_some()
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }
}

/// `err(h, S_n) = (1/n) Σ_{S_n} w·1[h(x) ≠ y]`, with `n` the round count.
/// Zero for a sample that has seen no rounds.
pub fn weighted_error(h: &Hypothesis, sample: &WeightedSample) -> Result<f64> {
    if sample.round_count() == 0 {
        return Ok(0.0);
    }
    Ok(crate::hypothesis::weighted_loss(h, sample)? / sample.round_count() as f64)
}

/// Importance-weighted mean `(1/n) Σ (Q_i/P_i) f(X_i, Y_i)`. Unqueried rounds
/// contribute zero and `f` is never called on them.
pub fn weighted_mean<F>(f: F, records: &[InteractionRecord]) -> f64
where
    F: Fn(&Point, Label) -> f64,
{
    if records.is_empty() {
        return 0.0;
    }
    let total: f64 = records.iter().filter_map(|r| r.label.map(|y| f(&r.x, y) / r.p)).sum();
    total / records.len() as f64
}
