//! Low-noise (Tsybakov) characterisation of a class under a distribution:
//! the smallest `κ` with `Pr(h(X) ≠ h*(X)) ≤ κ·(err(h) − err(h*))^α` for all
//! `h`, as a function of `α`, and a point estimate of the exponent.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hypothesis::HypothesisClass;
use crate::stream::DataDistribution;

use super::fit::loglog_slope;

/// Excess errors at or below this are treated as ties with `h*`.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kappa: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TsybakovOptions {
    /// Exponents at which `κ(α)` is tabulated; defaults to `0.05, 0.10, …, 1`.
    pub alpha_grid: Option<&'static [f64]>,
    /// Exponents whose `κ` exceeds this are left off the frontier.
    pub kappa_cap: Option<f64>,
    /// Only hypotheses with disagreement at most this enter the exponent
    /// regression; defaults to `0.2`.
    pub local_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsybakovFit {
    /// `(α, κ(α))` for every admissible exponent on the grid.
    pub frontier: Vec<(f64, f64)>,
    /// Grid exponents for which the condition fails (infinite or capped `κ`).
    pub excluded: Vec<f64>,
    /// Regression estimate of `α` with its tight `κ`; `None` if the
    /// condition fails for every exponent.
    pub model: Option<NoiseModel>,
    /// `(excess, disagreement)` for every hypothesis other than `h*`.
    pub points: Vec<(f64, f64)>,
}

fn default_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 20.0).collect()
}

/// Tight `κ` for a given exponent; infinite if some hypothesis ties with
/// `h*` while disagreeing with it on positive mass.
pub fn kappa_for(points: &[(f64, f64)], alpha: f64) -> f64 {
    points
        .iter()
        .filter(|(_, dis)| *dis > 0.0)
        .map(|&(excess, dis)| if excess <= TIE_TOLERANCE { f64::INFINITY } else { dis / excess.powf(alpha) })
        .fold(0.0, f64::max)
}

pub fn fit_tsybakov(
    class: &HypothesisClass,
    dist: &DataDistribution,
    hstar: usize,
    options: TsybakovOptions,
) -> Result<TsybakovFit> {
    let star = class.get(hstar)?;
    let star_err = dist.exact_error(&star.form)?;
    let mut points = Vec::with_capacity(class.len());
    for h in class {
        if h.id == hstar {
            continue;
        }
        let excess = dist.exact_error(&h.form)? - star_err;
        let dis = dist.disagreement_mass(&h.form, &star.form)?;
        points.push((excess.max(0.0), dis));
    }

    let grid = options.alpha_grid.map_or_else(default_grid, |g| g.to_vec());
    let cap = options.kappa_cap.unwrap_or(f64::INFINITY);
    let mut frontier = Vec::new();
    let mut excluded = Vec::new();
    for &alpha in &grid {
        let k = kappa_for(&points, alpha);
        if k.is_finite() && k <= cap {
            frontier.push((alpha, k));
        } else {
            excluded.push(alpha);
        }
    }

    let tied = points.iter().any(|&(e, d)| d > 0.0 && e <= TIE_TOLERANCE);
    let model = if tied {
        None
    } else {
        let radius = options.local_radius.unwrap_or(0.2);
        let usable: Vec<(f64, f64)> = points.iter().copied().filter(|&(e, d)| d > 0.0 && e > 0.0).collect();
        let mut local: Vec<(f64, f64)> = usable.iter().copied().filter(|&(_, d)| d <= radius).collect();
        if local.len() < 2 {
            local = usable;
        }
        let xs: Vec<f64> = local.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = local.iter().map(|p| p.1).collect();
        match loglog_slope(&xs, &ys) {
            Ok(slope) => {
                let alpha = slope.clamp(f64::MIN_POSITIVE, 1.0);
                Some(NoiseModel { kappa: kappa_for(&points, alpha), alpha })
            }
            // every hypothesis at the same distance: any exponent fits, take α = 1
            Err(_) if !local.is_empty() => Some(NoiseModel { kappa: kappa_for(&points, 1.0), alpha: 1.0 }),
            Err(_) => None,
        }
    };
    Ok(TsybakovFit { frontier, excluded, model, points })
}

/// Checks `dis ≤ κ·excess^α` for every recorded hypothesis.
pub fn tsybakov_holds(fit: &TsybakovFit, model: NoiseModel) -> bool {
    fit.points.iter().all(|&(excess, dis)| dis <= model.kappa * excess.powf(model.alpha) * (1.0 + 1e-9) + 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{HypothesisForm, Label, Point};
    use crate::stream::{tsybakov_labeler, Labeler, Marginal};
    use approx::assert_relative_eq;

    fn class() -> HypothesisClass {
        HypothesisClass::threshold_grid(101, 0.0, 1.0).unwrap()
    }

    #[test]
    fn separable_is_alpha_one_kappa_one() {
        let fit = fit_tsybakov(&class(), &DataDistribution::noisy_threshold(0.5, 0.0).unwrap(), 50, Default::default())
            .unwrap();
        let m = fit.model.unwrap();
        assert_relative_eq!(m.alpha, 1.0, max_relative = 1e-9);
        assert_relative_eq!(m.kappa, 1.0, max_relative = 1e-9);
        assert!(tsybakov_holds(&fit, m));
        assert!(fit.excluded.is_empty());
    }

    #[test]
    fn constant_noise_scales_kappa() {
        let fit = fit_tsybakov(&class(), &DataDistribution::noisy_threshold(0.5, 0.1).unwrap(), 50, Default::default())
            .unwrap();
        let m = fit.model.unwrap();
        assert_relative_eq!(m.alpha, 1.0, max_relative = 1e-9);
        assert_relative_eq!(m.kappa, 1.25, max_relative = 1e-9);
        // at α = 1 the frontier value agrees
        let last = fit.frontier.last().unwrap();
        assert_eq!(last.0, 1.0);
        assert_relative_eq!(last.1, 1.25, max_relative = 1e-9);
    }

    #[test]
    fn shaped_noise_recovers_exponent() {
        for alpha in [0.5, 2.0 / 3.0] {
            let dist = DataDistribution::new(Marginal::UniformUnit, tsybakov_labeler(alpha, 0.5).unwrap()).unwrap();
            let fit = fit_tsybakov(&class(), &dist, 50, Default::default()).unwrap();
            let m = fit.model.unwrap();
            assert!((m.alpha - alpha).abs() < 0.02, "{alpha}: {}", m.alpha);
            assert!(tsybakov_holds(&fit, m));
            assert!(!tsybakov_holds(&fit, NoiseModel { kappa: m.kappa, alpha: 1.0 }));
        }
    }

    #[test]
    fn ties_exclude_every_exponent() {
        // all labels positive on a two-point pool: a threshold and its reverse
        // each err on exactly one point but disagree everywhere
        let pool = vec![Point::scalar(0.2), Point::scalar(0.8)];
        let dist = DataDistribution::new(
            Marginal::Pool { points: pool },
            Labeler::Flip { base: HypothesisForm::constant(Label::Positive, 1), eta: 0.0 },
        )
        .unwrap();
        let class = HypothesisClass::new(vec![
            HypothesisForm::threshold(0.5),
            HypothesisForm::Threshold { threshold: 0.5, above: Label::Negative },
        ])
        .unwrap();
        let fit = fit_tsybakov(&class, &dist, 0, Default::default()).unwrap();
        assert!(fit.model.is_none());
        assert!(fit.frontier.is_empty());
        assert_eq!(fit.excluded.len(), 20);
        assert!(kappa_for(&fit.points, 0.5).is_infinite());
    }

    #[test]
    fn kappa_cap_trims_frontier() {
        let dist = DataDistribution::new(Marginal::UniformUnit, tsybakov_labeler(0.5, 0.5).unwrap()).unwrap();
        let options = TsybakovOptions { kappa_cap: Some(10.0), ..Default::default() };
        let fit = fit_tsybakov(&class(), &dist, 50, options).unwrap();
        assert!(!fit.excluded.is_empty());
        assert!(fit.frontier.iter().all(|&(_, k)| k <= 10.0));
        assert!(fit.excluded.contains(&1.0));
        assert!(fit.frontier.iter().any(|&(a, _)| a == 0.5));
    }
}
