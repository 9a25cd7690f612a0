//! Closed-form evaluators for the deviation, consistency and label
//! complexity guarantees.
//!
//! Bounds stated with `O(·)` come in two flavours. *Strict* versions assemble
//! explicit constants from `c4, c5` by evaluating the integral that bounds the
//! per-round query probability. *Fitted* versions keep the asymptotic shape
//! and take the hidden constants as arguments, to be calibrated on data.

use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Label, Point};
use crate::sample::{weighted_mean, InteractionRecord};
use crate::threshold::Constants;

/// Inputs of the martingale deviation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationParams {
    pub t: f64,
    pub n: usize,
    /// A-priori cap on the importance weights.
    pub r_max: f64,
    /// Largest realized weight over rounds where `f ≠ 0` (1 if none).
    pub r_n: f64,
}

impl DeviationParams {
    pub fn new(t: f64, n: usize, r_max: f64, r_n: f64) -> Result<Self> {
        if !(t >= 0.0) || n == 0 {
            return Err(Error::InvalidParameter(format!("need t >= 0 and n >= 1, got t = {t}, n = {n}")));
        }
        if !(1.0 <= r_n && r_n <= r_max && r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 1 <= R_n <= r_max, got {r_n}, {r_max}")));
        }
        Ok(Self { t, n, r_max, r_n })
    }
}

/// `√(2 R_n t/n) + √(2t/n) + R_n t/(3n)`.
pub fn deviation_bound(p: &DeviationParams) -> f64 {
    let n = p.n as f64;
    (2.0 * p.r_n * p.t / n).sqrt() + (2.0 * p.t / n).sqrt() + p.r_n * p.t / (3.0 * n)
}

/// Probability `2(3 + log₂ r_max)·e^{−t/2}` with which the deviation bound may fail.
pub fn deviation_failure_probability(t: f64, r_max: f64) -> f64 {
    2.0 * (3.0 + r_max.log2()) * (-t / 2.0).exp()
}

/// `min{P_i : h(X_i) ≠ h*(X_i)} ∪ {1}`.
pub fn p_min(h: &Hypothesis, hstar: &Hypothesis, records: &[InteractionRecord]) -> Result<f64> {
    let mut p = 1.0f64;
    for r in records {
        if h.evaluate(r.x())? != hstar.evaluate(r.x())? {
            p = p.min(r.p());
        }
    }
    Ok(p)
}

/// Uniform deviation envelope `√(ε_n/P_min(h)) + ε_n/P_min(h)`.
pub fn uniform_deviation_bound(
    h: &Hypothesis,
    hstar: &Hypothesis,
    records: &[InteractionRecord],
    eps_n: f64,
) -> Result<f64> {
    let p = p_min(h, hstar, records)?;
    Ok((eps_n / p).sqrt() + eps_n / p)
}

/// Realized `|(err(h,Z) − err(h*,Z)) − (err(h) − err(h*))|` given true errors.
pub fn uniform_deviation(
    h: &Hypothesis,
    hstar: &Hypothesis,
    records: &[InteractionRecord],
    true_err_h: f64,
    true_err_hstar: f64,
) -> f64 {
    fn mistake(g: &Hypothesis, x: &Point, y: Label) -> f64 {
        if g.evaluate(x) != Ok(y) {
            1.0
        } else {
            0.0
        }
    }
    let emp = weighted_mean(|x, y| mistake(h, x, y), records) - weighted_mean(|x, y| mistake(hstar, x, y), records);
    (emp - (true_err_h - true_err_hstar)).abs()
}

/// Excess-error envelope `√(2C0 ln n/(n−1)) + 2C0 ln n/(n−1)`; infinite at `n = 1`.
pub fn consistency_bound(c0: f64, n: usize) -> f64 {
    if n <= 1 {
        return f64::INFINITY;
    }
    let e = 2.0 * c0 * (n as f64).ln() / (n - 1) as f64;
    e.sqrt() + e
}

/// Excess-error envelope under the low-noise condition,
/// `c_κ·(C1 ln n/(n−1))^{1/(2−α)}`.
pub fn lownoise_consistency_bound(c_kappa: f64, c1_const: f64, n: usize, alpha: f64) -> f64 {
    if n <= 1 {
        return f64::INFINITY;
    }
    c_kappa * (c1_const * (n as f64).ln() / (n - 1) as f64).powf(1.0 / (2.0 - alpha))
}

/// Low-noise deviation budget `c·ln((n+1)|H|/δ)/n`; the absolute constant
/// `c` is not pinned down and must be supplied.
pub fn lownoise_epsilon(c: f64, n: usize, class_size: usize, delta: f64) -> f64 {
    c * (((n + 1) * class_size) as f64 / delta).ln() / n as f64
}

fn round_budget(c0: f64, n: usize) -> f64 {
    c0 * (n as f64).ln() / (n - 1) as f64
}

/// Positive root of `1.5(c4/γ² + c5/γ)ε = 1`.
fn gamma_zero(constants: &Constants, eps: f64) -> f64 {
    let b = 1.5 * constants.c5 * eps;
    0.5 * (b + (b * b + 6.0 * constants.c4 * eps).sqrt())
}

/// Strict per-round bound on `E[Q_n]` in the agnostic case. The
/// distribution of the excess error of the relevant hypothesis is controlled
/// through `Pr(excess ≤ γ) ≤ θ(2 err* + γ)`, and the conditional query
/// probability through `min{1, 1.5(c4/γ² + c5/γ)ε}`; integrating by parts
/// gives the value returned here.
pub fn query_bound_strict(theta: f64, err_star: f64, c0: f64, n: usize, constants: &Constants) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let eps = round_budget(c0, n);
    let (c4, c5) = (constants.c4, constants.c5);
    let base = 1.5 * (c4 + c5) * eps;
    let g0 = gamma_zero(constants, eps);
    if g0 >= 1.0 {
        return base;
    }
    let tail = 2.0 * err_star * (c4 * (g0.powi(-2) - 1.0) + c5 * (1.0 / g0 - 1.0))
        + 2.0 * c4 * (1.0 / g0 - 1.0)
        + c5 * (1.0 / g0).ln();
    base + theta * 1.5 * eps * tail
}

/// Per-round shape `θ·2err* + θ(a√(C0 ln n/(n−1)) + b·C0 ln²n/(n−1))`.
pub fn query_bound_fitted(theta: f64, err_star: f64, c0: f64, n: usize, a: f64, b: f64) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let eps = round_budget(c0, n);
    theta * 2.0 * err_star + theta * (a * eps.sqrt() + b * eps * (n as f64).ln())
}

/// Strict cumulative bound: the first query plus the sum of the per-round
/// strict bounds, each capped at one. Evaluated at every `n` in `ns`
/// (which must be sorted).
pub fn label_complexity_strict_curve(
    theta: f64,
    err_star: f64,
    c0: f64,
    ns: &[usize],
    constants: &Constants,
) -> Vec<f64> {
    cumulative(ns, |k| query_bound_strict(theta, err_star, c0, k, constants))
}

pub fn label_complexity_strict(theta: f64, err_star: f64, c0: f64, n: usize, constants: &Constants) -> f64 {
    label_complexity_strict_curve(theta, err_star, c0, &[n], constants)[0]
}

/// `1 + θ·2err*(n−1) + θ(a√(C0 n ln n) + b·C0 ln³n)`.
pub fn label_complexity_fitted(theta: f64, err_star: f64, c0: f64, n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    let ln = nf.ln();
    1.0 + theta * 2.0 * err_star * (nf - 1.0) + theta * (a * (c0 * nf * ln).sqrt() + b * c0 * ln.powi(3))
}

/// Strict per-round bound under the low-noise condition, using
/// `Pr(excess ≤ γ) ≤ θκγ^α` in the same integral.
pub fn lownoise_query_bound_strict(
    theta: f64,
    kappa: f64,
    alpha: f64,
    c0: f64,
    n: usize,
    constants: &Constants,
) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let eps = round_budget(c0, n);
    let (c4, c5) = (constants.c4, constants.c5);
    let base = 1.5 * (c4 + c5) * eps;
    let g0 = gamma_zero(constants, eps);
    if g0 >= 1.0 {
        return base;
    }
    let first = 2.0 * c4 * (g0.powf(alpha - 2.0) - 1.0) / (2.0 - alpha);
    let second = if alpha < 1.0 { c5 * (g0.powf(alpha - 1.0) - 1.0) / (1.0 - alpha) } else { c5 * (1.0 / g0).ln() };
    base + theta * kappa * 1.5 * eps * (first + second)
}

pub fn lownoise_label_complexity_strict_curve(
    theta: f64,
    kappa: f64,
    alpha: f64,
    c0: f64,
    ns: &[usize],
    constants: &Constants,
) -> Vec<f64> {
    cumulative(ns, |k| lownoise_query_bound_strict(theta, kappa, alpha, c0, k, constants))
}

/// `θ·κ·c_α·(C0 ln n)^{α/2}·n^{1−α/2}`.
pub fn lownoise_label_complexity_fitted(theta: f64, kappa: f64, alpha: f64, c0: f64, n: usize, c_alpha: f64) -> f64 {
    let nf = n as f64;
    theta * kappa * c_alpha * (c0 * nf.ln()).powf(alpha / 2.0) * nf.powf(1.0 - alpha / 2.0)
}

fn cumulative(ns: &[usize], per_round: impl Fn(usize) -> f64) -> Vec<f64> {
    debug_assert!(ns.windows(2).all(|w| w[0] <= w[1]));
    let mut out = Vec::with_capacity(ns.len());
    let mut total = 0.0;
    let mut k = 0usize;
    for &n in ns {
        while k < n {
            k += 1;
            total += if k == 1 { 1.0 } else { per_round(k).min(1.0) };
        }
        out.push(total);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::HypothesisForm;
    use approx::assert_relative_eq;

    #[test]
    fn deviation_bound_substitution() {
        let p = DeviationParams::new(2.0, 8, 1.0, 1.0).unwrap();
        assert_relative_eq!(deviation_bound(&p), 2f64.sqrt() + 1.0 / 12.0, max_relative = 1e-15);
        let zero = DeviationParams::new(0.0, 8, 4.0, 2.0).unwrap();
        assert_eq!(deviation_bound(&zero), 0.0);
        assert!(DeviationParams::new(1.0, 8, 2.0, 3.0).is_err());
        assert_relative_eq!(deviation_failure_probability(8.0, 2.0), 8.0 * (-4f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn consistency_bound_values() {
        assert!(consistency_bound(8.0, 1).is_infinite());
        let e = 16.0 * 2f64.ln();
        assert_relative_eq!(consistency_bound(8.0, 2), e.sqrt() + e, max_relative = 1e-15);
        assert!(consistency_bound(8.0, 1_000_000) < 0.02);
        let mut prev = consistency_bound(8.0, 2);
        for n in 3..5000 {
            let v = consistency_bound(8.0, n);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn uniform_deviation_bound_defaults_without_disagreement() {
        let h = Hypothesis { id: 0, form: HypothesisForm::threshold(0.5) };
        let records = vec![
            InteractionRecord::skipped(Point::scalar(0.7), 0.1).unwrap(),
            InteractionRecord::queried(Point::scalar(0.2), 0.3, Label::Negative).unwrap(),
        ];
        let eps = 0.04;
        assert_relative_eq!(uniform_deviation_bound(&h, &h, &records, eps).unwrap(), 0.2 + 0.04, max_relative = 1e-15);
        assert_eq!(uniform_deviation(&h, &h, &records, 0.3, 0.3), 0.0);
        // a hypothesis disagreeing at 0.7 picks up P = 0.1
        let g = Hypothesis { id: 1, form: HypothesisForm::threshold(0.8) };
        assert_relative_eq!(
            uniform_deviation_bound(&g, &h, &records, eps).unwrap(),
            (0.4f64).sqrt() + 0.4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn lownoise_exponents() {
        // α = 1 gives (ln n/n)^1, α → 0 recovers the square root rate
        let n = 10_000;
        let base = (n as f64).ln() / (n - 1) as f64;
        assert_relative_eq!(lownoise_consistency_bound(1.0, 1.0, n, 1.0), base, max_relative = 1e-14);
        assert_relative_eq!(lownoise_consistency_bound(1.0, 1.0, n, 1e-12), base.sqrt(), max_relative = 1e-9);
        assert!(lownoise_consistency_bound(1.0, 1.0, n, 1.0) < consistency_bound(0.5, n));
    }

    #[test]
    fn lownoise_label_complexity_exponents() {
        let r = lownoise_label_complexity_fitted(1.0, 1.0, 1.0, 1.0, 400, 1.0)
            / lownoise_label_complexity_fitted(1.0, 1.0, 1.0, 1.0, 100, 1.0);
        assert_relative_eq!(r, (400.0 * 400f64.ln() / (100.0 * 100f64.ln())).sqrt(), max_relative = 1e-12);
        let r0 = lownoise_label_complexity_fitted(1.0, 1.0, 1e-12, 1.0, 400, 1.0)
            / lownoise_label_complexity_fitted(1.0, 1.0, 1e-12, 1.0, 100, 1.0);
        assert_relative_eq!(r0, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn strict_query_bound_matches_quadrature() {
        // integrate min{1, 1.5(c4/γ²+c5/γ)ε}·d/dγ[θ(2e+γ)] plus the boundary term numerically
        let c = Constants::standard();
        let (theta, err_star, c0, n) = (2.0, 0.1, 2.0, 200_000);
        let eps = round_budget(c0, n);
        let g = |x: f64| (1.5 * (c.c4 / (x * x) + c.c5 / x) * eps).min(1.0);
        let cdf = |x: f64| theta * (2.0 * err_star + x);
        // ∫ g dF = g(1)F(1) − ∫ F dg ; evaluate −∫ F g' by midpoint rule on a log grid
        let g0 = gamma_zero(&c, eps);
        let steps = 200_000;
        let mut integral = 0.0;
        let (lo, hi) = (g0.ln(), 0.0f64);
        for i in 0..steps {
            let a = (lo + (hi - lo) * i as f64 / steps as f64).exp();
            let b = (lo + (hi - lo) * (i + 1) as f64 / steps as f64).exp();
            integral += cdf(0.5 * (a + b)) * (g(a) - g(b));
        }
        let expected = 1.5 * (c.c4 + c.c5) * eps + integral;
        let strict = query_bound_strict(theta, err_star, c0, n, &c);
        assert_relative_eq!(strict, expected, max_relative = 1e-6);
        let _ = g(1.0) * cdf(1.0);
    }

    #[test]
    fn strict_bounds_are_capped_and_monotone() {
        let c = Constants::standard();
        let ns = [1, 10, 100, 1000, 10_000];
        let curve = label_complexity_strict_curve(2.0, 0.0, 2.0, &ns, &c);
        assert_eq!(curve[0], 1.0);
        for (v, &n) in curve.iter().zip(&ns) {
            assert!(*v <= n as f64);
        }
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(label_complexity_strict(2.0, 0.0, 2.0, 1000, &c), curve[3]);
        // strict theta = 0 collapses to the first query plus the θ-free term
        let flat = label_complexity_strict(0.0, 0.0, 2.0, 1000, &c);
        let manual: f64 = 1.0 + (2..=1000).map(|k| (1.5 * (c.c4 + c.c5) * round_budget(2.0, k)).min(1.0)).sum::<f64>();
        assert_relative_eq!(flat, manual, max_relative = 1e-12);
    }

    #[test]
    fn fitted_label_complexity_theta_zero_is_one() {
        assert_eq!(label_complexity_fitted(0.0, 0.3, 8.0, 1000, 1.0, 1.0), 1.0);
        let v = label_complexity_fitted(2.0, 0.0, 8.0, 10_000, 0.1, 0.0);
        assert!(v / 10_000.0 < label_complexity_fitted(2.0, 0.0, 8.0, 1000, 0.1, 0.0) / 1000.0);
    }

    #[test]
    fn strict_lownoise_alpha_one_matches_query_bound_at_zero_noise() {
        // with κ = 1 and α = 1, θκγ is the err* = 0 case of θ(2err* + γ)
        let c = Constants::standard();
        for n in [100, 10_000, 1_000_000] {
            assert_relative_eq!(
                lownoise_query_bound_strict(2.0, 1.0, 1.0, 2.0, n, &c),
                query_bound_strict(2.0, 0.0, 2.0, n, &c),
                max_relative = 1e-12
            );
        }
        let alpha_half = lownoise_query_bound_strict(2.0, 1.0, 0.5, 2.0, 1_000_000, &c);
        assert!(alpha_half.is_finite() && alpha_half > 0.0);
        let curve = lownoise_label_complexity_strict_curve(2.0, 1.0, 0.999_999, 2.0, &[1_000_000], &c);
        let curve1 = lownoise_label_complexity_strict_curve(2.0, 1.0, 1.0, 2.0, &[1_000_000], &c);
        assert_relative_eq!(curve[0], curve1[0], max_relative = 1e-4);
    }
}
