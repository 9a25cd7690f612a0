//! Disagreement coefficient of a finite class around its best hypothesis.
//!
//! `DIS(h*, r)` is the set of points on which some `h` with
//! `Pr(h(X) ≠ h*(X)) ≤ r` disagrees with `h*`. Each exact cell enters that
//! region at a critical radius, the smallest `r_h` among the hypotheses that
//! disagree with `h*` on it, so `Pr(DIS(h*, r))` is a right-continuous step
//! function of `r` and `Pr(DIS)/r` peaks at one of its jumps.

use crate::error::{Error, Result};
use crate::hypothesis::HypothesisClass;
use crate::stream::DataDistribution;

/// Relative slack when comparing a hypothesis' radius with a probe radius,
/// so that a radius computed as a sum of cell masses still counts as `≤ r`.
const RADIUS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementProfile {
    /// Sorted probe radii.
    pub radii: Vec<f64>,
    /// `Pr(DIS(h*, r))` at each probe radius.
    pub masses: Vec<f64>,
    /// `max_r Pr(DIS(h*, r))/r` over the probe radii.
    pub theta: f64,
    /// Probe radius attaining `theta`.
    pub argmax_radius: f64,
    /// Exact supremum over all `r > 0`, attained at a jump of the step function.
    pub theta_sup: f64,
    /// True when the probe maximum sits at the smallest probe radius and the
    /// exact supremum is larger, i.e. the grid is too coarse to see it.
    pub at_grid_floor: bool,
    /// True when no hypothesis disagrees with `h*` on a set of positive mass.
    pub degenerate: bool,
    /// Jumps `(radius, mass)` of the step function in increasing order.
    pub steps: Vec<(f64, f64)>,
}

impl DisagreementProfile {
    /// `Pr(DIS(h*, r))` for any `r ≥ 0`.
    pub fn mass_at(&self, r: f64) -> f64 {
        self.steps.iter().take_while(|(rho, _)| *rho <= r * (1.0 + RADIUS_TOLERANCE)).last().map_or(0.0, |(_, m)| *m)
    }

    /// `sup_{r > eps} Pr(DIS(h*, r))/r`.
    pub fn theta_above(&self, eps: f64) -> f64 {
        let mut best = if eps > 0.0 { self.mass_at(eps) / eps } else { 0.0 };
        for &(rho, m) in &self.steps {
            if rho > eps {
                best = best.max(m / rho);
            }
        }
        if eps <= 0.0 {
            best = best.max(self.theta_sup);
        }
        best
    }
}

/// Computes the coefficient for `hstar` (an id in `class`) on the given
/// probe radii. Requires a distribution with exact cells.
pub fn disagreement_coefficient(
    class: &HypothesisClass,
    dist: &DataDistribution,
    hstar: usize,
    radii: &[f64],
) -> Result<DisagreementProfile> {
    if radii.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter(format!("probe radius must be positive, got {r}")));
    }
    let star = class.get(hstar)?;
    let cells = dist.exact_cells(class.forms())?;
    let star_labels = cells.iter().map(|c| star.evaluate(&c.point)).collect::<Result<Vec<_>>>()?;

    let mut disagree = Vec::with_capacity(class.len());
    let mut radius = Vec::with_capacity(class.len());
    for h in class {
        let mut mask = Vec::with_capacity(cells.len());
        let mut r = 0.0;
        for (cell, &s) in cells.iter().zip(&star_labels) {
            let d = h.evaluate(&cell.point)? != s;
            if d {
                r += cell.mass;
            }
            mask.push(d);
        }
        disagree.push(mask);
        radius.push(r);
    }

    // critical radius of every cell
    let mut entries: Vec<(f64, f64)> = Vec::new();
    for (j, cell) in cells.iter().enumerate() {
        let critical = (0..class.len())
            .filter(|&i| disagree[i][j] && radius[i] > 0.0)
            .map(|i| radius[i])
            .fold(f64::INFINITY, f64::min);
        if critical.is_finite() && cell.mass > 0.0 {
            entries.push((critical, cell.mass));
        }
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite radii"));

    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut total = 0.0;
    for (rho, m) in entries {
        total += m;
        match steps.last_mut() {
            Some(last) if rho <= last.0 * (1.0 + RADIUS_TOLERANCE) => last.1 = total,
            _ => steps.push((rho, total)),
        }
    }
    let theta_sup = steps.iter().map(|(r, m)| m / r).fold(0.0, f64::max);

    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    let mut profile = DisagreementProfile {
        radii: sorted.clone(),
        masses: Vec::new(),
        theta: 0.0,
        argmax_radius: sorted[0],
        theta_sup,
        at_grid_floor: false,
        degenerate: steps.is_empty(),
        steps,
    };
    for &r in &sorted {
        let m = profile.mass_at(r);
        profile.masses.push(m);
        if m / r > profile.theta {
            profile.theta = m / r;
            profile.argmax_radius = r;
        }
    }
    profile.at_grid_floor = profile.argmax_radius == sorted[0] && profile.theta_sup > profile.theta * (1.0 + 1e-9);
    Ok(profile)
}

/// Log-spaced probe radii from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(Error::InvalidParameter(format!("bad radius grid [{lo}, {hi}] x {count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect())
}
