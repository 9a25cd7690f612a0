//! Finite hypothesis classes and the error minimization oracle.
//!
//! Every hypothesis is a total, deterministic map from points to `±1`. The
//! oracle answers the two questions the active learner asks each round: which
//! hypothesis minimizes the importance-weighted error on the current sample,
//! and which one does among those forced to disagree with it at a given point.
//! Ties are always broken towards the lowest hypothesis id.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sample::{WeightedExample, WeightedSample};
use crate::stream::DataDistribution;

/// A point of the instance space: a finite real vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(Self(coords))
    }

    /// One-dimensional point. Panics on a non-finite coordinate.
    pub fn scalar(x: f64) -> Self {
        Self::new(vec![x]).expect("scalar point must be finite")
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

/// Binary label. Serialized as `-1` / `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn flip(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_i64(value: i64) -> Result<Self> {
        match value {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::InvalidParameter(format!("label must be -1 or +1, got {other}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = i64::deserialize(deserializer)?;
        Label::from_i64(value).map_err(serde::de::Error::custom)
    }
}

fn positive() -> Label {
    Label::Positive
}

/// The shape of a classifier, tagged by `form` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum HypothesisForm {
    /// 1-D threshold: `above` when `x >= threshold`, the opposite label otherwise.
    Threshold {
        threshold: f64,
        #[serde(default = "positive")]
        above: Label,
    },
    /// 1-D interval: `inside` on the closed interval `[lo, hi]`.
    Interval {
        lo: f64,
        hi: f64,
        #[serde(default = "positive")]
        inside: Label,
    },
    /// Axis-aligned stump on coordinate `axis` of a `dim`-dimensional point.
    Stump {
        dim: usize,
        axis: usize,
        threshold: f64,
        #[serde(default = "positive")]
        above: Label,
    },
    /// Explicit labels over a finite pool; `default` everywhere else.
    TruthTable { dim: usize, entries: Vec<(Point, Label)>, default: Label },
}

impl HypothesisForm {
    /// The hypothesis predicting `label` everywhere.
    pub fn constant(label: Label, dim: usize) -> Self {
        HypothesisForm::TruthTable { dim, entries: Vec::new(), default: label }
    }

    pub fn threshold(threshold: f64) -> Self {
        HypothesisForm::Threshold { threshold, above: Label::Positive }
    }

    pub fn dim(&self) -> usize {
        match self {
            HypothesisForm::Threshold { .. } | HypothesisForm::Interval { .. } => 1,
            HypothesisForm::Stump { dim, .. } | HypothesisForm::TruthTable { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidHypothesis(format!("{what} must be finite")))
            }
        };
        match self {
            HypothesisForm::Threshold { threshold, .. } => finite(*threshold, "threshold"),
            HypothesisForm::Interval { lo, hi, .. } => {
                finite(*lo, "interval bound")?;
                finite(*hi, "interval bound")?;
                if lo > hi {
                    return Err(Error::InvalidHypothesis(format!("interval [{lo}, {hi}] is reversed")));
                }
                Ok(())
            }
            HypothesisForm::Stump { dim, axis, threshold, .. } => {
                finite(*threshold, "threshold")?;
                if axis >= dim {
                    return Err(Error::InvalidHypothesis(format!("stump axis {axis} outside dimension {dim}")));
                }
                Ok(())
            }
            HypothesisForm::TruthTable { dim, entries, .. } => {
                if let Some((p, _)) = entries.iter().find(|(p, _)| p.dim() != *dim) {
                    return Err(Error::DimensionMismatch { expected: *dim, got: p.dim() });
                }
                Ok(())
            }
        }
    }

    pub fn evaluate(&self, x: &Point) -> Result<Label> {
        let expected = self.dim();
        if x.dim() != expected {
            return Err(Error::DimensionMismatch { expected, got: x.dim() });
        }
        let c = x.coords();
        Ok(match self {
            HypothesisForm::Threshold { threshold, above } => {
                if c[0] >= *threshold {
                    *above
                } else {
                    above.flip()
                }
            }
            HypothesisForm::Interval { lo, hi, inside } => {
                if c[0] >= *lo && c[0] <= *hi {
                    *inside
                } else {
                    inside.flip()
                }
            }
            HypothesisForm::Stump { axis, threshold, above, .. } => {
                if c[*axis] >= *threshold {
                    *above
                } else {
                    above.flip()
                }
            }
            HypothesisForm::TruthTable { entries, default, .. } => {
                entries.iter().find(|(p, _)| p == x).map(|(_, y)| *y).unwrap_or(*default)
            }
        })
    }

    /// Coordinates where a one-dimensional form can change its prediction.
    /// Truth tables contribute nothing: they differ from their default only on
    /// a finite set of points.
    pub(crate) fn breakpoints_1d(&self) -> Vec<f64> {
        match self {
            HypothesisForm::Threshold { threshold, .. } => vec![*threshold],
            HypothesisForm::Interval { lo, hi, .. } => vec![*lo, *hi],
            HypothesisForm::Stump { threshold, .. } => vec![*threshold],
            HypothesisForm::TruthTable { .. } => Vec::new(),
        }
    }
}

/// A member of a class: a form plus its index in that class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: usize,
    pub form: HypothesisForm,
}

impl Hypothesis {
    pub fn evaluate(&self, x: &Point) -> Result<Label> {
        self.form.evaluate(x)
    }
}

/// An ordered, finite set of hypotheses. Ids equal positions.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisClass {
    hypotheses: Vec<Hypothesis>,
}

impl HypothesisClass {
    /// Builds a class from forms. An empty class is representable so that the
    /// oracle can report it; use [`HypothesisClass::require_learnable`] before
    /// running a learner.
    pub fn new(forms: Vec<HypothesisForm>) -> Result<Self> {
        let hypotheses = forms
            .into_iter()
            .enumerate()
            .map(|(id, form)| {
                form.validate()?;
                Ok(Hypothesis { id, form })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { hypotheses })
    }

    /// `count` thresholds evenly spaced over `[lo, hi]`, all predicting `+1`
    /// to the right.
    pub fn threshold_grid(count: usize, lo: f64, hi: f64) -> Result<Self> {
        ClassSpec::ThresholdGrid { count, lo, hi, above: Label::Positive }.build()
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn get(&self, id: usize) -> Result<&Hypothesis> {
        self.hypotheses.get(id).ok_or(Error::UnknownHypothesis(id))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hypothesis> {
        self.hypotheses.iter()
    }

    pub fn forms(&self) -> impl Iterator<Item = &HypothesisForm> {
        self.hypotheses.iter().map(|h| &h.form)
    }

    /// Common input dimension, if the class is non-empty and consistent.
    pub fn dim(&self) -> Result<usize> {
        let first = self.hypotheses.first().ok_or(Error::EmptyClass)?.form.dim();
        if let Some(h) = self.hypotheses.iter().find(|h| h.form.dim() != first) {
            return Err(Error::DimensionMismatch { expected: first, got: h.form.dim() });
        }
        Ok(first)
    }

    pub fn require_learnable(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::ClassTooSmall { required: 2, got: self.len() });
        }
        self.dim().map(|_| ())
    }

    /// Whether some pair of hypotheses disagrees at `x`.
    pub fn splits(&self, x: &Point) -> Result<bool> {
        let mut seen: Option<Label> = None;
        for h in &self.hypotheses {
            let y = h.evaluate(x)?;
            match seen {
                None => seen = Some(y),
                Some(s) if s != y => return Ok(true),
                Some(_) => {}
            }
        }
        Ok(false)
    }
}

impl<'a> IntoIterator for &'a HypothesisClass {
    type Item = &'a Hypothesis;
    type IntoIter = std::slice::Iter<'a, Hypothesis>;

    fn into_iter(self) -> Self::IntoIter {
        self.hypotheses.iter()
    }
}

/// Declarative class description used by experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    /// `count` thresholds at `lo + i (hi - lo) / (count - 1)`.
    ThresholdGrid {
        count: usize,
        lo: f64,
        hi: f64,
        #[serde(default = "positive")]
        above: Label,
    },
    /// Every interval `[g_i, g_j]`, `i < j`, over `points` evenly spaced grid points.
    IntervalGrid {
        points: usize,
        lo: f64,
        hi: f64,
        #[serde(default = "positive")]
        inside: Label,
    },
    /// Stumps on every axis of `[lo, hi]^dim`, `per_axis` thresholds each.
    StumpGrid {
        dim: usize,
        per_axis: usize,
        lo: f64,
        hi: f64,
        #[serde(default = "positive")]
        above: Label,
    },
    Explicit {
        hypotheses: Vec<HypothesisForm>,
    },
}

fn grid(count: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if count < 2 || !(lo < hi) {
        return Err(Error::InvalidParameter(format!("grid needs count >= 2 and lo < hi, got {count} on [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect())
}

impl ClassSpec {
    pub fn build(&self) -> Result<HypothesisClass> {
        let forms = match self {
            ClassSpec::ThresholdGrid { count, lo, hi, above } => grid(*count, *lo, *hi)?
                .into_iter()
                .map(|threshold| HypothesisForm::Threshold { threshold, above: *above })
                .collect(),
            ClassSpec::IntervalGrid { points, lo, hi, inside } => {
                let g = grid(*points, *lo, *hi)?;
                let mut forms = Vec::new();
                for i in 0..g.len() {
                    for j in i + 1..g.len() {
                        forms.push(HypothesisForm::Interval { lo: g[i], hi: g[j], inside: *inside });
                    }
                }
                forms
            }
            ClassSpec::StumpGrid { dim, per_axis, lo, hi, above } => {
                let g = grid(*per_axis, *lo, *hi)?;
                (0..*dim)
                    .flat_map(|axis| {
                        g.iter().map(move |&threshold| HypothesisForm::Stump {
                            dim: *dim,
                            axis,
                            threshold,
                            above: *above,
                        })
                    })
                    .collect()
            }
            ClassSpec::Explicit { hypotheses } => hypotheses.clone(),
        };
        HypothesisClass::new(forms)
    }
}

/// Result of an oracle call: the chosen hypothesis and its importance-weighted
/// mistake total `Σ w·1[h(x) ≠ y]` (not yet divided by the round count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub id: usize,
    pub loss: f64,
}

/// Error minimization oracle over a finite class.
///
/// Implementations must return exact minimizers with lowest-id tie-breaking;
/// the engine is agnostic to how they get there.
pub trait ErmOracle {
    /// Informs the oracle that `example` was appended to the sample.
    fn observe(&mut self, class: &HypothesisClass, example: &WeightedExample) -> Result<()>;

    fn erm(&self, class: &HypothesisClass, sample: &WeightedSample) -> Result<Fit>;

    /// Minimizer among hypotheses `h` with `h(x) != forbidden`; `None` when
    /// the whole class predicts `forbidden` at `x`.
    fn erm_with_disagreement(
        &self,
        class: &HypothesisClass,
        sample: &WeightedSample,
        x: &Point,
        forbidden: Label,
    ) -> Result<Option<Fit>>;
}

/// Importance-weighted mistake total of `h` on `sample`, summed in sample order.
pub fn weighted_loss(h: &Hypothesis, sample: &WeightedSample) -> Result<f64> {
    let mut total = 0.0;
    for ex in sample.examples() {
        if h.evaluate(&ex.x)? != ex.y {
            total += ex.weight;
        }
    }
    Ok(total)
}

fn argmin(candidates: impl Iterator<Item = Result<Fit>>) -> Result<Option<Fit>> {
    let mut best: Option<Fit> = None;
    for fit in candidates {
        let fit = fit?;
        // strict `<` keeps the earliest (lowest id) minimizer
        if best.is_none_or(|b| fit.loss < b.loss) {
            best = Some(fit);
        }
    }
    Ok(best)
}

/// Stateless oracle that rescans the sample for every query.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExhaustiveOracle;

impl ErmOracle for ExhaustiveOracle {
    fn observe(&mut self, _class: &HypothesisClass, _example: &WeightedExample) -> Result<()> {
        Ok(())
    }

    fn erm(&self, class: &HypothesisClass, sample: &WeightedSample) -> Result<Fit> {
        argmin(class.iter().map(|h| Ok(Fit { id: h.id, loss: weighted_loss(h, sample)? })))?.ok_or(Error::EmptyClass)
    }

    fn erm_with_disagreement(
        &self,
        class: &HypothesisClass,
        sample: &WeightedSample,
        x: &Point,
        forbidden: Label,
    ) -> Result<Option<Fit>> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        let mut candidates = Vec::new();
        for h in class {
            if h.evaluate(x)? != forbidden {
                candidates.push(h);
            }
        }
        argmin(candidates.into_iter().map(|h| Ok(Fit { id: h.id, loss: weighted_loss(h, sample)? })))
    }
}

/// Oracle that keeps a running mistake total per hypothesis, making each
/// query `O(|H|)` regardless of sample size. Totals accumulate in sample
/// order, so they are bit-identical to [`weighted_loss`].
#[derive(Debug, Clone)]
pub struct IncrementalOracle {
    losses: Vec<f64>,
    observed: usize,
}

impl IncrementalOracle {
    pub fn new(class: &HypothesisClass) -> Self {
        Self { losses: vec![0.0; class.len()], observed: 0 }
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    fn check_sync(&self, class: &HypothesisClass, sample: &WeightedSample) -> Result<()> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        if self.losses.len() != class.len() || self.observed != sample.examples().len() {
            return Err(Error::InvalidParameter(format!(
                "incremental oracle saw {} examples over {} hypotheses; sample has {} over {}",
                self.observed,
                self.losses.len(),
                sample.examples().len(),
                class.len()
            )));
        }
        Ok(())
    }
}

impl ErmOracle for IncrementalOracle {
    fn observe(&mut self, class: &HypothesisClass, example: &WeightedExample) -> Result<()> {
        for (loss, h) in self.losses.iter_mut().zip(class) {
            if h.evaluate(&example.x)? != example.y {
                *loss += example.weight;
            }
        }
        self.observed += 1;
        Ok(())
    }

    fn erm(&self, class: &HypothesisClass, sample: &WeightedSample) -> Result<Fit> {
        self.check_sync(class, sample)?;
        argmin(self.losses.iter().enumerate().map(|(id, &loss)| Ok(Fit { id, loss })))?.ok_or(Error::EmptyClass)
    }

    fn erm_with_disagreement(
        &self,
        class: &HypothesisClass,
        sample: &WeightedSample,
        x: &Point,
        forbidden: Label,
    ) -> Result<Option<Fit>> {
        self.check_sync(class, sample)?;
        let mut best: Option<Fit> = None;
        for (h, &loss) in class.iter().zip(&self.losses) {
            if h.evaluate(x)? != forbidden && best.is_none_or(|b| loss < b.loss) {
                best = Some(Fit { id: h.id, loss });
            }
        }
        Ok(best)
    }
}

/// Importance-weighted empirical risk minimizer over `class`.
pub fn erm<'c>(class: &'c HypothesisClass, sample: &WeightedSample) -> Result<&'c Hypothesis> {
    let fit = ExhaustiveOracle.erm(class, sample)?;
    class.get(fit.id)
}

/// Risk minimizer among hypotheses disagreeing with `forbidden` at `x`.
pub fn erm_with_disagreement<'c>(
    class: &'c HypothesisClass,
    sample: &WeightedSample,
    x: &Point,
    forbidden: Label,
) -> Result<Option<&'c Hypothesis>> {
    match ExhaustiveOracle.erm_with_disagreement(class, sample, x, forbidden)? {
        Some(fit) => class.get(fit.id).map(Some),
        None => Ok(None),
    }
}

/// Exact `Pr(h(X) != Y)` under `dist`.
pub fn true_error(h: &Hypothesis, dist: &DataDistribution) -> Result<f64> {
    dist.exact_error(&h.form)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_minus() -> HypothesisClass {
        HypothesisClass::new(vec![
            HypothesisForm::constant(Label::Positive, 1),
            HypothesisForm::constant(Label::Negative, 1),
        ])
        .unwrap()
    }

    #[test]
    fn threshold_evaluation() {
        let h = HypothesisForm::threshold(0.5);
        assert_eq!(h.evaluate(&Point::scalar(0.7)).unwrap(), Label::Positive);
        assert_eq!(h.evaluate(&Point::scalar(0.3)).unwrap(), Label::Negative);
        let flipped = HypothesisForm::Threshold { threshold: 0.5, above: Label::Negative };
        assert_eq!(flipped.evaluate(&Point::scalar(0.7)).unwrap(), Label::Negative);
    }

    #[test]
    fn truth_table_lookup() {
        let pool = [Point::scalar(0.1), Point::scalar(0.2)];
        let h = HypothesisForm::TruthTable {
            dim: 1,
            entries: vec![(pool[0].clone(), Label::Negative), (pool[1].clone(), Label::Positive)],
            default: Label::Negative,
        };
        assert_eq!(h.evaluate(&pool[0]).unwrap(), Label::Negative);
        assert_eq!(h.evaluate(&pool[1]).unwrap(), Label::Positive);
        assert_eq!(h.evaluate(&Point::scalar(0.9)).unwrap(), Label::Negative);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = HypothesisForm::threshold(0.5);
        let x = Point::new(vec![0.1, 0.2]).unwrap();
        assert_eq!(h.evaluate(&x), Err(Error::DimensionMismatch { expected: 1, got: 2 }));
        let stump = HypothesisForm::Stump { dim: 3, axis: 2, threshold: 0.0, above: Label::Positive };
        assert!(stump.evaluate(&x).is_err());
    }

    #[test]
    fn non_finite_points_rejected() {
        assert_eq!(Point::new(vec![f64::NAN]), Err(Error::NonFiniteCoordinate));
        assert_eq!(Point::new(vec![0.0, f64::INFINITY]), Err(Error::NonFiniteCoordinate));
    }

    #[test]
    fn interval_and_stump() {
        let i = HypothesisForm::Interval { lo: 0.2, hi: 0.4, inside: Label::Positive };
        assert_eq!(i.evaluate(&Point::scalar(0.2)).unwrap(), Label::Positive);
        assert_eq!(i.evaluate(&Point::scalar(0.41)).unwrap(), Label::Negative);
        let s = HypothesisForm::Stump { dim: 2, axis: 1, threshold: 0.5, above: Label::Positive };
        assert_eq!(s.evaluate(&Point::new(vec![0.0, 0.6]).unwrap()).unwrap(), Label::Positive);
        assert_eq!(s.evaluate(&Point::new(vec![0.9, 0.4]).unwrap()).unwrap(), Label::Negative);
    }

    #[test]
    fn empty_sample_erm_picks_lowest_id() {
        let class = HypothesisClass::threshold_grid(10, 0.0, 1.0).unwrap();
        let sample = WeightedSample::new();
        assert_eq!(erm(&class, &sample).unwrap().id, 0);
    }

    #[test]
    fn single_example_erm() {
        let class = plus_minus();
        let mut sample = WeightedSample::new();
        sample.record_round(Some((Point::scalar(0.3), Label::Positive, 1.0))).unwrap();
        assert_eq!(erm(&class, &sample).unwrap().id, 0);
    }

    #[test]
    fn constrained_erm_on_two_constants() {
        let class = plus_minus();
        let sample = WeightedSample::new();
        let alt = erm_with_disagreement(&class, &sample, &Point::scalar(0.9), Label::Positive).unwrap();
        assert_eq!(alt.unwrap().id, 1);
    }

    #[test]
    fn constrained_erm_absent_when_class_agrees() {
        let class =
            HypothesisClass::new(vec![HypothesisForm::constant(Label::Positive, 1), HypothesisForm::threshold(0.5)])
                .unwrap();
        let alt = erm_with_disagreement(&class, &WeightedSample::new(), &Point::scalar(0.8), Label::Positive).unwrap();
        assert!(alt.is_none());
        assert!(!class.splits(&Point::scalar(0.8)).unwrap());
        assert!(class.splits(&Point::scalar(0.2)).unwrap());
    }

    #[test]
    fn empty_class_errors() {
        let class = HypothesisClass::new(Vec::new()).unwrap();
        let sample = WeightedSample::new();
        assert_eq!(erm(&class, &sample).unwrap_err(), Error::EmptyClass);
        assert_eq!(
            erm_with_disagreement(&class, &sample, &Point::scalar(0.0), Label::Positive).unwrap_err(),
            Error::EmptyClass
        );
        assert!(class.require_learnable().is_err());
    }

    #[test]
    fn incremental_oracle_tracks_exhaustive() {
        let class = HypothesisClass::threshold_grid(7, 0.0, 1.0).unwrap();
        let mut oracle = IncrementalOracle::new(&class);
        let mut sample = WeightedSample::new();
        for (i, &(x, y, w)) in [(0.1, -1, 1.0), (0.9, 1, 2.5), (0.4, 1, 1.0), (0.6, -1, 4.0)].iter().enumerate() {
            let ex = sample
                .record_round(Some((Point::scalar(x), Label::from_i64(y).unwrap(), w)))
                .unwrap()
                .cloned()
                .unwrap();
            assert_eq!(ex.round, i + 1);
            oracle.observe(&class, &ex).unwrap();
            assert_eq!(oracle.erm(&class, &sample).unwrap(), ExhaustiveOracle.erm(&class, &sample).unwrap());
            let x = Point::scalar(0.55);
            assert_eq!(
                oracle.erm_with_disagreement(&class, &sample, &x, Label::Positive).unwrap(),
                ExhaustiveOracle.erm_with_disagreement(&class, &sample, &x, Label::Positive).unwrap()
            );
        }
    }

    #[test]
    fn incremental_oracle_detects_desync() {
        let class = HypothesisClass::threshold_grid(3, 0.0, 1.0).unwrap();
        let oracle = IncrementalOracle::new(&class);
        let mut sample = WeightedSample::new();
        sample.record_round(Some((Point::scalar(0.2), Label::Positive, 1.0))).unwrap();
        assert!(matches!(oracle.erm(&class, &sample), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn class_spec_json_round_trip() {
        let spec = ClassSpec::ThresholdGrid { count: 5, lo: 0.0, hi: 1.0, above: Label::Positive };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ClassSpec>(&json).unwrap(), spec);
        let class = spec.build().unwrap();
        assert_eq!(class.len(), 5);
        assert_eq!(class.get(4).unwrap().form, HypothesisForm::threshold(1.0));

        let explicit: ClassSpec = serde_json::from_str(
            r#"{"kind":"explicit","hypotheses":[{"form":"threshold","threshold":0.5},
                {"form":"interval","lo":0.1,"hi":0.3,"inside":-1}]}"#,
        )
        .unwrap();
        assert_eq!(explicit.build().unwrap().len(), 2);
        assert!(serde_json::from_str::<ClassSpec>(r#"{"kind":"threshold_grid","count":3,"lo":0,"hi":1,"bogus":1}"#)
            .is_err());
    }

    #[test]
    fn grid_specs_sizes() {
        let intervals = ClassSpec::IntervalGrid { points: 5, lo: 0.0, hi: 1.0, inside: Label::Positive };
        assert_eq!(intervals.build().unwrap().len(), 10);
        let stumps = ClassSpec::StumpGrid { dim: 3, per_axis: 4, lo: 0.0, hi: 1.0, above: Label::Positive };
        let class = stumps.build().unwrap();
        assert_eq!(class.len(), 12);
        assert_eq!(class.dim().unwrap(), 3);
    }
}
