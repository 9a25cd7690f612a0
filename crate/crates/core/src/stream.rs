//! Synthetic i.i.d. labeled streams with controlled noise.
//!
//! A [`DataDistribution`] pairs a marginal over points with a labeler that
//! draws `Y` by flipping a deterministic base classifier with a
//! point-dependent rate `η(x)`. For one-dimensional uniform marginals and
//! finite pools every quantity the analysis needs (true errors, disagreement
//! masses) is computed exactly by splitting the space into cells on which all
//! involved classifiers are constant.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisClass, HypothesisForm, Label, Point};

/// Distribution of the unlabeled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Marginal {
    /// Uniform on `[0, 1]`.
    UniformUnit,
    /// Uniform over a finite pool of points.
    Pool { points: Vec<Point> },
    /// Uniform on `[0, 1]^dim`.
    ProductUniform { dim: usize },
}

impl Marginal {
    pub fn dim(&self) -> Result<usize> {
        match self {
            Marginal::UniformUnit => Ok(1),
            Marginal::ProductUniform { dim } => Ok(*dim),
            Marginal::Pool { points } => {
                let first = points.first().ok_or_else(|| Error::InvalidParameter("empty point pool".into()))?;
                if let Some(p) = points.iter().find(|p| p.dim() != first.dim()) {
                    return Err(Error::DimensionMismatch { expected: first.dim(), got: p.dim() });
                }
                Ok(first.dim())
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            Marginal::UniformUnit => Point::scalar(rng.gen::<f64>()),
            Marginal::ProductUniform { dim } => {
                Point::new((0..*dim).map(|_| rng.gen::<f64>()).collect()).expect("unit draws are finite")
            }
            Marginal::Pool { points } => points[rng.gen_range(0..points.len())].clone(),
        }
    }
}

/// Conditional label model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Labeler {
    /// `base(x)` flipped with constant probability `eta`.
    Flip { base: HypothesisForm, eta: f64 },
    /// Threshold at `boundary`, flipped with probability
    /// `(1 − margin·min(1, |x−boundary|/width)^β)/2`, `β = 1/α − 1`.
    ///
    /// For thresholds on the uniform marginal the excess error of a threshold
    /// at distance `d ≤ width` is `margin·d^(β+1)/((β+1)·width^β)`, so the
    /// class satisfies the low-noise condition with exponent `α = 1/(1+β)`.
    Tsybakov {
        boundary: f64,
        #[serde(default = "positive")]
        above: Label,
        alpha: f64,
        margin: f64,
        width: f64,
    },
}

fn positive() -> Label {
    Label::Positive
}

/// Margin-profile labeler with exponent `alpha` around `base_threshold`,
/// flip rate `0.1` away from the boundary and a boundary layer of width `0.5`.
/// With `alpha = 1` this is a constant flip rate of `0.1`.
pub fn tsybakov_labeler(alpha: f64, base_threshold: f64) -> Result<Labeler> {
    let labeler =
        Labeler::Tsybakov { boundary: base_threshold, above: Label::Positive, alpha, margin: 0.8, width: 0.5 };
    labeler.validate()?;
    Ok(labeler)
}

impl Labeler {
    pub fn validate(&self) -> Result<()> {
        match self {
            Labeler::Flip { base, eta } => {
                base.validate()?;
                if !(*eta >= 0.0 && *eta < 0.5) {
                    return Err(Error::InvalidParameter(format!("flip rate must lie in [0, 1/2), got {eta}")));
                }
            }
            Labeler::Tsybakov { boundary, alpha, margin, width, .. } => {
                if !boundary.is_finite() {
                    return Err(Error::InvalidParameter("boundary must be finite".into()));
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
                }
                if !(*margin > 0.0 && *margin <= 1.0) {
                    return Err(Error::InvalidParameter(format!("margin must lie in (0, 1], got {margin}")));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
                }
            }
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        match self {
            Labeler::Flip { base, .. } => base.dim(),
            Labeler::Tsybakov { .. } => 1,
        }
    }

    /// The noiseless classifier `h°`.
    pub fn base(&self) -> HypothesisForm {
        match self {
            Labeler::Flip { base, .. } => base.clone(),
            Labeler::Tsybakov { boundary, above, .. } => {
                HypothesisForm::Threshold { threshold: *boundary, above: *above }
            }
        }
    }

    /// `η(x) = Pr(Y ≠ h°(x) | X = x)`.
    pub fn flip_rate(&self, x: &Point) -> f64 {
        match self {
            Labeler::Flip { eta, .. } => *eta,
            Labeler::Tsybakov { boundary, alpha, margin, width, .. } => {
                let beta = 1.0 / alpha - 1.0;
                let d = (x.coords()[0] - boundary).abs();
                0.5 * (1.0 - margin * (d / width).min(1.0).powf(beta))
            }
        }
    }

    /// `∫_a^b (1 − 2η(x)) dx` for one-dimensional labelers.
    fn margin_integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Labeler::Flip { eta, .. } => (1.0 - 2.0 * eta) * (b - a),
            Labeler::Tsybakov { boundary, alpha, margin, width, .. } => {
                let beta = 1.0 / alpha - 1.0;
                // ∫_0^d margin·min(1, t/w)^β dt
                let radial = |d: f64| {
                    if d <= *width {
                        margin * d.powf(beta + 1.0) / ((beta + 1.0) * width.powf(beta))
                    } else {
                        margin * (width / (beta + 1.0) + (d - width))
                    }
                };
                let antiderivative = |x: f64| {
                    if x >= *boundary {
                        radial(x - boundary)
                    } else {
                        -radial(boundary - x)
                    }
                };
                antiderivative(b) - antiderivative(a)
            }
        }
    }
}

/// Joint distribution of `(X, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataDistribution {
    pub marginal: Marginal,
    pub labeler: Labeler,
}

/// A piece of the instance space on which the classifiers used to build it
/// are constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub point: Point,
    pub mass: f64,
    /// Interval covered by the cell on one-dimensional uniform marginals.
    pub span: Option<(f64, f64)>,
}

impl DataDistribution {
    pub fn new(marginal: Marginal, labeler: Labeler) -> Result<Self> {
        let dist = Self { marginal, labeler };
        dist.validate()?;
        Ok(dist)
    }

    /// Threshold base classifier at `boundary` on `[0, 1]` with flip rate `eta`.
    pub fn noisy_threshold(boundary: f64, eta: f64) -> Result<Self> {
        Self::new(Marginal::UniformUnit, Labeler::Flip { base: HypothesisForm::threshold(boundary), eta })
    }

    pub fn validate(&self) -> Result<()> {
        self.labeler.validate()?;
        let dim = self.marginal.dim()?;
        if self.labeler.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.labeler.dim() });
        }
        Ok(())
    }

    pub fn dim(&self) -> Result<usize> {
        self.marginal.dim()
    }

    /// Exact cell decomposition for the given classifiers plus the base
    /// classifier. Unsupported for product marginals.
    pub fn exact_cells<'a>(&self, forms: impl IntoIterator<Item = &'a HypothesisForm>) -> Result<Vec<Cell>> {
        match &self.marginal {
            Marginal::Pool { points } => {
                let mass = 1.0 / points.len() as f64;
                Ok(points.iter().map(|p| Cell { point: p.clone(), mass, span: None }).collect())
            }
            Marginal::UniformUnit => {
                let base = self.labeler.base();
                let mut cuts = vec![0.0, 1.0];
                let mut all: Vec<&HypothesisForm> = forms.into_iter().collect();
                all.push(&base);
                for form in all {
                    if form.dim() != 1 {
                        return Err(Error::DimensionMismatch { expected: 1, got: form.dim() });
                    }
                    cuts.extend(form.breakpoints_1d().into_iter().filter(|&c| c > 0.0 && c < 1.0));
                }
                if let Labeler::Tsybakov { boundary, .. } = self.labeler {
                    if boundary > 0.0 && boundary < 1.0 {
                        cuts.push(boundary);
                    }
                }
                cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
                cuts.dedup();
                Ok(cuts
                    .windows(2)
                    .map(|w| Cell {
                        point: Point::scalar(0.5 * (w[0] + w[1])),
                        mass: w[1] - w[0],
                        span: Some((w[0], w[1])),
                    })
                    .collect())
            }
            Marginal::ProductUniform { .. } => Err(Error::NoExactExpectation("product-uniform marginal".into())),
        }
    }

    /// Exact `err(h) = Pr(h(X) ≠ Y)`.
    pub fn exact_error(&self, form: &HypothesisForm) -> Result<f64> {
        let cells = self.exact_cells(std::iter::once(form))?;
        let base = self.labeler.base();
        let mut err = 0.0;
        for cell in &cells {
            let disagrees = form.evaluate(&cell.point)? != base.evaluate(&cell.point)?;
            err += match cell.span {
                // ∫ η + ∫_{h ≠ h°} (1 − 2η) over the cell
                Some((a, b)) => {
                    let m = self.labeler.margin_integral(a, b);
                    0.5 * ((b - a) - m) + if disagrees { m } else { 0.0 }
                }
                None => {
                    let eta = self.labeler.flip_rate(&cell.point);
                    cell.mass * if disagrees { 1.0 - eta } else { eta }
                }
            };
        }
        Ok(err.clamp(0.0, 1.0))
    }

    /// Exact `Pr(f(X) ≠ g(X))`.
    pub fn disagreement_mass(&self, f: &HypothesisForm, g: &HypothesisForm) -> Result<f64> {
        let cells = self.exact_cells([f, g])?;
        let mut mass = 0.0;
        for cell in &cells {
            if f.evaluate(&cell.point)? != g.evaluate(&cell.point)? {
                mass += cell.mass;
            }
        }
        Ok(mass)
    }

    /// Monte Carlo estimate of `err(h)` and its standard error.
    pub fn monte_carlo_error(&self, form: &HypothesisForm, samples: usize, seed: u64) -> Result<(f64, f64)> {
        if samples < 2 {
            return Err(Error::InvalidParameter("need at least two Monte Carlo samples".into()));
        }
        let stream = draw_stream(self, samples, seed)?;
        let mut mistakes = 0usize;
        for (x, label) in stream {
            if form.evaluate(&x)? != label.reveal() {
                mistakes += 1;
            }
        }
        let p = mistakes as f64 / samples as f64;
        Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
    }

    /// Hypothesis of minimum exact error (lowest id on ties) and that error.
    pub fn best_in_class(&self, class: &HypothesisClass) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for h in class {
            let e = self.exact_error(&h.form)?;
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((h.id, e));
            }
        }
        best.ok_or(Error::EmptyClass)
    }
}

/// Label of a streamed point; it can only be read by consuming the handle.
#[derive(Debug)]
pub struct HiddenLabel(Label);

impl HiddenLabel {
    pub fn new(label: Label) -> Self {
        Self(label)
    }

    pub fn reveal(self) -> Label {
        self.0
    }
}

/// Source of `(X_k, hidden Y_k)` pairs.
pub trait LabeledStream {
    fn next_round(&mut self) -> Option<(Point, HiddenLabel)>;
}

/// Seeded stream of `n` i.i.d. draws.
#[derive(Debug, Clone)]
pub struct SyntheticStream {
    dist: DataDistribution,
    base: HypothesisForm,
    rng: ChaCha8Rng,
    remaining: usize,
}

/// Lazily materialized stream; the same `(dist, seed)` always yields the
/// same sequence, independent of which labels are revealed.
pub fn draw_stream(dist: &DataDistribution, n: usize, seed: u64) -> Result<SyntheticStream> {
    dist.validate()?;
    Ok(SyntheticStream {
        dist: dist.clone(),
        base: dist.labeler.base(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        remaining: n,
    })
}

impl LabeledStream for SyntheticStream {
    fn next_round(&mut self) -> Option<(Point, HiddenLabel)> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let x = self.dist.marginal.sample(&mut self.rng);
        let clean = self.base.evaluate(&x).expect("labeler dimension validated against marginal");
        let flip = self.rng.gen::<f64>() < self.dist.labeler.flip_rate(&x);
        let y = if flip { clean.flip() } else { clean };
        Some((x, HiddenLabel(y)))
    }
}

impl Iterator for SyntheticStream {
    type Item = (Point, HiddenLabel);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_round()
    }
}

/// Writes `index,x0..,y` rows for `n` draws.
pub fn write_stream_csv<W: Write>(dist: &DataDistribution, n: usize, seed: u64, writer: W) -> Result<()> {
    let dim = dist.dim()?;
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.push("y".into());
    out.write_record(&header)?;
    for (i, (x, y)) in draw_stream(dist, n, seed)?.enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(x.coords().iter().map(|c| c.to_string()));
        row.push(y.reveal().as_i8().to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
