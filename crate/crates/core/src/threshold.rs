//! Rejection threshold: the query probability assigned to each new point.
//!
//! With `ε_k = C0·ln(k)/(k−1)` and gap `G_k` between the best hypothesis and
//! the best one disagreeing on the new point, the label is requested with
//! probability one when `G_k ≤ √ε_k + ε_k`, and otherwise with the root
//! `s ∈ (0, 1)` of
//!
//! ```text
//! G = (c1/√s − c1 + 1)·√ε + (c2/s − c2 + 1)·ε
//! ```
//!
//! "log" is natural throughout; `log₂` is used only inside the uniform
//! deviation budget of [`deviation_budget`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The absolute constants `c1..c5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Constants {
    /// `c1 = 5 + 2√2`, `c2 = 5`, and the derived `c3, c4, c5`.
    pub fn standard() -> Self {
        Self::derive(5.0 + 2.0 * std::f64::consts::SQRT_2, 5.0)
    }

    /// Derives `c3 = ((c1+√2)/(c1−2))²`, `c4 = (c1+√c3)²`, `c5 = c2 + c3`.
    pub fn derive(c1: f64, c2: f64) -> Self {
        let c3 = ((c1 + std::f64::consts::SQRT_2) / (c1 - 2.0)).powi(2);
        let c4 = (c1 + c3.sqrt()).powi(2);
        Self { c1, c2, c3, c4, c5: c2 + c3 }
    }
}

/// Whether the configuration carries the theoretical guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Standard constants and a `C0` that dominates the deviation budget.
    Analysis,
    /// Any `C0 ≥ 2` and user-chosen `c1, c2`; no guarantee is claimed.
    Experimental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub c0: f64,
    pub delta: f64,
    pub constants: Constants,
    pub mode: ThresholdMode,
    /// Query probability used when no hypothesis disagrees at the point.
    pub degenerate_probability: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_c0(c0: f64) -> Result<()> {
    if !(c0.is_finite() && c0 >= 2.0) {
        return Err(Error::InvalidParameter(format!("C0 must be finite and at least 2, got {c0}")));
    }
    Ok(())
}

impl ThresholdConfig {
    /// Analysis-mode configuration with an explicit `C0`. Callers that know the
    /// class size should also run [`ThresholdConfig::check_envelope`].
    pub fn analysis(c0: f64, delta: f64) -> Result<Self> {
        check_c0(c0)?;
        check_delta(delta)?;
        Ok(Self {
            c0,
            delta,
            constants: Constants::standard(),
            mode: ThresholdMode::Analysis,
            degenerate_probability: 1.0,
        })
    }

    /// Analysis-mode configuration with `C0 = default_c0(class_size, delta, horizon)`.
    pub fn auto(class_size: usize, delta: f64, horizon: usize) -> Result<Self> {
        check_delta(delta)?;
        Self::analysis(default_c0(class_size, delta, horizon)?, delta)
    }

    /// Experimental configuration, e.g. `C0 = 8, c1 = c2 = 1`.
    pub fn experimental(c0: f64, delta: f64, c1: f64, c2: f64) -> Result<Self> {
        check_c0(c0)?;
        check_delta(delta)?;
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParameter(format!("c1 and c2 must be positive, got {c1}, {c2}")));
        }
        Ok(Self {
            c0,
            delta,
            constants: Constants::derive(c1, c2),
            mode: ThresholdMode::Experimental,
            degenerate_probability: 1.0,
        })
    }

    pub fn with_degenerate_probability(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        self.degenerate_probability = p;
        Ok(self)
    }

    /// Verifies `ε_n ≤ C0·ln(n+1)/n` for every `n ≤ horizon`; returns the
    /// first violating `n`.
    pub fn check_envelope(&self, class_size: usize, horizon: usize) -> Result<()> {
        for n in 1..=horizon {
            let budget = deviation_budget(n, class_size, self.delta)?;
            // relative slack absorbs the rounding in default_c0's ratio
            if budget > self.c0 * ((n + 1) as f64).ln() / n as f64 * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "C0 = {} does not dominate the deviation budget at n = {n}",
                    self.c0
                )));
            }
        }
        Ok(())
    }
}

/// Uniform deviation budget
/// `ε_n = 16·ln(2(3 + n·log₂n)·n(n+1)|H|/δ)/n`.
pub fn deviation_budget(n: usize, class_size: usize, delta: f64) -> Result<f64> {
    if n == 0 || class_size == 0 {
        return Err(Error::InvalidParameter("n and |H| must be positive".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let nf = n as f64;
    let inner = 2.0 * (3.0 + nf * nf.log2()) * nf * (nf + 1.0) * class_size as f64 / delta;
    Ok(16.0 * inner.ln() / nf)
}

/// Smallest `C0 ≥ 2` with `ε_n ≤ C0·ln(n+1)/n` for all `1 ≤ n ≤ horizon`.
pub fn default_c0(class_size: usize, delta: f64, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let mut c0: f64 = 2.0;
    for n in 1..=horizon {
        let ratio = n as f64 * deviation_budget(n, class_size, delta)? / ((n + 1) as f64).ln();
        c0 = c0.max(ratio);
    }
    Ok(c0)
}

/// `ε = C0·ln(k)/(k−1)`, infinite at `k = 1`.
pub fn epsilon_budget(cfg: &ThresholdConfig, k: usize) -> f64 {
    assert!(k >= 1, "rounds are 1-based");
    if k == 1 {
        return f64::INFINITY;
    }
    cfg.c0 * (k as f64).ln() / (k - 1) as f64
}

/// Importance-weighted error gap of a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    Finite(f64),
    /// No hypothesis disagrees with the leader at the point.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdInputs {
    pub k: usize,
    pub gap: Gap,
}

/// Query probability `P_k ∈ (0, 1]`.
pub fn query_probability(cfg: &ThresholdConfig, inputs: ThresholdInputs) -> f64 {
    let g = match inputs.gap {
        Gap::Degenerate => return cfg.degenerate_probability,
        Gap::Finite(g) => g,
    };
    let eps = epsilon_budget(cfg, inputs.k);
    if eps.is_infinite() || g <= eps.sqrt() + eps {
        return 1.0;
    }
    let s = solve_root(&cfg.constants, eps, g);
    // the root is in (0, 1) whenever the trigger fails; clamp guards round-off at the boundary
    s.min(1.0)
}

/// Closed-form root. In `u = 1/√s` the equation is the quadratic
/// `c2·ε·u² + c1·√ε·u − D = 0` with `D = G + (c1−1)√ε + (c2−1)ε`; the positive
/// root is rationalized so that no cancellation occurs.
pub fn solve_root(constants: &Constants, eps: f64, g: f64) -> f64 {
    let Constants { c1, c2, .. } = *constants;
    let root_eps = eps.sqrt();
    let d = g + (c1 - 1.0) * root_eps + (c2 - 1.0) * eps;
    let sqrt_s = (c1 * root_eps + (c1 * c1 * eps + 4.0 * d * c2 * eps).sqrt()) / (2.0 * d);
    sqrt_s * sqrt_s
}

/// Right-hand side of the threshold equation at `s`.
pub fn threshold_rhs(constants: &Constants, eps: f64, s: f64) -> f64 {
    let Constants { c1, c2, .. } = *constants;
    (c1 / s.sqrt() - c1 + 1.0) * eps.sqrt() + (c2 / s - c2 + 1.0) * eps
}

/// Reference solver: bisection on `u = 1/√s`, where the right-hand side is
/// increasing. Used to cross-check [`solve_root`].
pub fn solve_root_bisection(constants: &Constants, eps: f64, g: f64) -> f64 {
    let f = |u: f64| threshold_rhs(constants, eps, 1.0 / (u * u)) - g;
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    1.0 / (u * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(c0: f64) -> ThresholdConfig {
        ThresholdConfig::analysis(c0, 0.05).unwrap()
    }

    #[test]
    fn standard_constants() {
        let c = Constants::standard();
        assert_relative_eq!(c.c1, 7.828_427_124_746_19, max_relative = 1e-14);
        assert_eq!(c.c2, 5.0);
        // frozen from a 50-digit evaluation
        assert_relative_eq!(c.c3, 2.514_718_625_761_429_7, max_relative = 1e-13);
        assert_relative_eq!(c.c4, 88.627_416_997_969_52, max_relative = 1e-13);
        assert_relative_eq!(c.c5, 7.514_718_625_761_43, max_relative = 1e-13);
    }

    #[test]
    fn deviation_budget_at_one() {
        // n log2 n vanishes at n = 1, leaving 16 ln 12
        let v = deviation_budget(1, 1, 1.0).unwrap();
        assert_relative_eq!(v, 16.0 * 12f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(v, 39.758_506_396_608_006, max_relative = 1e-14);
    }

    #[test]
    fn deviation_budget_high_precision_reference() {
        // 3.8428333377896507637119 from a 50-digit mpmath evaluation
        let v = deviation_budget(100, 100, 0.05).unwrap();
        assert_relative_eq!(v, 3.842_833_337_789_650_6, max_relative = 1e-12);
    }

    #[test]
    fn deviation_budget_decreases_with_delta() {
        let a = deviation_budget(50, 10, 0.1).unwrap();
        let b = deviation_budget(50, 10, 0.2).unwrap();
        assert!(b < a);
        assert!(deviation_budget(0, 10, 0.1).is_err());
    }

    #[test]
    fn default_c0_dominates_budget() {
        for &(h, d, horizon) in &[(2, 0.9, 10), (100, 0.05, 1000), (7, 0.3, 300)] {
            let c0 = default_c0(h, d, horizon).unwrap();
            assert!(c0 >= 2.0);
            for n in 1..=horizon {
                assert!(deviation_budget(n, h, d).unwrap() <= c0 * ((n + 1) as f64).ln() / n as f64 * (1.0 + 1e-15));
            }
            assert!(ThresholdConfig::analysis(c0, d).unwrap().check_envelope(h, horizon).is_ok());
        }
    }

    #[test]
    fn default_c0_matches_reference_scan() {
        // 50-digit scan over n ≤ 10^4: max ratio 232.81194856613189160 at n = 1
        let c0 = default_c0(100, 0.05, 10_000).unwrap();
        assert_relative_eq!(c0, 232.811_948_566_131_9, max_relative = 1e-12);
        assert_relative_eq!(default_c0(2, 0.9, 10).unwrap(), 75.791_449_506_659_3, max_relative = 1e-12);
    }

    #[test]
    fn envelope_check_rejects_small_c0() {
        assert!(cfg(8.0).check_envelope(100, 10).is_err());
        assert!(ThresholdConfig::analysis(1.5, 0.05).is_err());
        assert!(ThresholdConfig::analysis(8.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_budget_values() {
        assert!(epsilon_budget(&cfg(8.0), 1).is_infinite());
        assert_relative_eq!(epsilon_budget(&cfg(8.0), 2), 8.0 * 2f64.ln(), max_relative = 1e-15);
        let c = cfg(8.0);
        let mut prev = epsilon_budget(&c, 2);
        for k in 3..=10_000 {
            let e = epsilon_budget(&c, k);
            assert!(e < prev, "not decreasing at k = {k}");
            prev = e;
        }
    }

    #[test]
    fn first_round_and_zero_gap_always_query() {
        let c = cfg(8.0);
        assert_eq!(query_probability(&c, ThresholdInputs { k: 1, gap: Gap::Finite(1e9) }), 1.0);
        for k in 1..200 {
            assert_eq!(query_probability(&c, ThresholdInputs { k, gap: Gap::Finite(0.0) }), 1.0);
        }
        assert_eq!(query_probability(&c, ThresholdInputs { k: 50, gap: Gap::Degenerate }), 1.0);
        let half = c.with_degenerate_probability(0.5).unwrap();
        assert_eq!(query_probability(&half, ThresholdInputs { k: 50, gap: Gap::Degenerate }), 0.5);
    }

    #[test]
    fn root_back_substitution() {
        let c = cfg(8.0);
        let eps = epsilon_budget(&c, 100);
        let g = 10.0 * (eps.sqrt() + eps);
        let s = query_probability(&c, ThresholdInputs { k: 100, gap: Gap::Finite(g) });
        assert!(s > 0.0 && s < 1.0);
        let residual = (threshold_rhs(&c.constants, eps, s) - g).abs();
        assert!(residual < 1e-9 * g.max(1.0), "residual {residual}");
        assert_relative_eq!(s, solve_root_bisection(&c.constants, eps, g), max_relative = 1e-10);
    }

    #[test]
    fn root_is_continuous_at_trigger() {
        // at G = √ε + ε the equation is solved by s = 1
        let constants = Constants::standard();
        let eps = 0.01;
        let s = solve_root(&constants, eps, eps.sqrt() + eps);
        assert_relative_eq!(s, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn crude_floor_at_extreme_gaps() {
        let c = cfg(2.0);
        for k in 2..=50usize {
            let g_max = 2.0 * ((k - 1) as f64).powi(k as i32 - 1);
            let s = query_probability(&c, ThresholdInputs { k, gap: Gap::Finite(g_max) });
            let floor = (k as f64).powi(-(k as i32));
            assert!(s >= floor, "k = {k}: {s} < {floor}");
        }
    }

    proptest! {
        #[test]
        fn probability_non_increasing_in_gap(k in 2usize..5000, c0 in 2.0f64..300.0, a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let c = cfg(c0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p_lo = query_probability(&c, ThresholdInputs { k, gap: Gap::Finite(lo) });
            let p_hi = query_probability(&c, ThresholdInputs { k, gap: Gap::Finite(hi) });
            prop_assert!(p_hi <= p_lo);
            prop_assert!(p_hi > 0.0 && p_lo <= 1.0);
        }

        #[test]
        fn closed_form_agrees_with_bisection(eps in 1e-6f64..5.0, scale in 1.0001f64..1e6) {
            let constants = Constants::standard();
            let g = (eps.sqrt() + eps) * scale;
            let s = solve_root(&constants, eps, g);
            let t = solve_root_bisection(&constants, eps, g);
            prop_assert!((s - t).abs() <= 1e-9 * s.max(1e-300) + 1e-300);
        }

        #[test]
        fn asymptotic_envelope(eps in 1e-6f64..1.0, scale in 1.0001f64..1e6) {
            // √s ≤ c1√ε/D + √(c2ε/D) with D ≥ G gives s ≤ 2(c1²/G² + c2/G)ε
            let constants = Constants::standard();
            let g = (eps.sqrt() + eps) * scale;
            let s = solve_root(&constants, eps, g);
            let envelope = 2.0 * (constants.c1.powi(2) / (g * g) + constants.c2 / g) * eps;
            prop_assert!(s <= envelope * (1.0 + 1e-12));
        }
    }
}
