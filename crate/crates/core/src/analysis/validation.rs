//! Monte Carlo validation suites. Each suite returns a report with one
//! pass/fail line per check; all randomness comes from the given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::hypothesis::{
    erm, erm_with_disagreement, ErmOracle, HypothesisClass, HypothesisForm, IncrementalOracle, Label, Point,
};
use crate::sample::{weighted_mean, InteractionRecord, WeightedSample};
use crate::stream::{draw_stream, DataDistribution};
use crate::threshold::{solve_root, threshold_rhs, Constants};

use super::bounds::{deviation_bound, deviation_failure_probability, DeviationParams};
use super::disagreement::disagreement_coefficient;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.into(), checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &["unbiasedness", "root", "coverage", "erm", "theta"];

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "unbiasedness" => unbiasedness(&UnbiasednessSetup::default(), seed),
        "root" => threshold_root(10_000, seed),
        "coverage" => deviation_coverage(&CoverageSetup::default(), seed),
        "erm" => erm_equivalence(1_000, seed),
        "theta" => theta_thresholds(),
        other => {
            Err(crate::error::Error::InvalidParameter(format!("unknown suite {other:?}; expected one of {SUITES:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnbiasednessSetup {
    pub points: usize,
    pub p: f64,
    pub resamples: usize,
    pub thresholds: Vec<f64>,
}

impl Default for UnbiasednessSetup {
    fn default() -> Self {
        Self { points: 20, p: 0.5, resamples: 100_000, thresholds: vec![0.1, 0.3, 0.5, 0.7, 0.9] }
    }
}

/// Fixes one labeled stream and resamples only the query coins: the mean
/// importance-weighted error must match the full-sample error.
pub fn unbiasedness(setup: &UnbiasednessSetup, seed: u64) -> Result<SuiteReport> {
    let dist = DataDistribution::noisy_threshold(0.5, 0.2)?;
    let stream: Vec<(Point, Label)> = draw_stream(&dist, setup.points, seed)?.map(|(x, y)| (x, y.reveal())).collect();
    let mut coins = ChaCha8Rng::seed_from_u64(seed ^ 0xC011);
    let hyps: Vec<HypothesisForm> = setup.thresholds.iter().map(|&t| HypothesisForm::threshold(t)).collect();
    let mut sums = vec![0.0; hyps.len()];
    let mut squares = vec![0.0; hyps.len()];
    for _ in 0..setup.resamples {
        let records: Vec<InteractionRecord> = stream
            .iter()
            .map(|(x, y)| {
                if coins.gen::<f64>() < setup.p {
                    InteractionRecord::queried(x.clone(), setup.p, *y)
                } else {
                    InteractionRecord::skipped(x.clone(), setup.p)
                }
            })
            .collect::<Result<_>>()?;
        for (j, h) in hyps.iter().enumerate() {
            let v = weighted_mean(|x, y| if h.evaluate(x) != Ok(y) { 1.0 } else { 0.0 }, &records);
            sums[j] += v;
            squares[j] += v * v;
        }
    }
    let mut report = SuiteReport::new("unbiasedness");
    let r = setup.resamples as f64;
    for (j, h) in hyps.iter().enumerate() {
        let full = stream.iter().filter(|(x, y)| h.evaluate(x) != Ok(*y)).count() as f64 / stream.len() as f64;
        let mean = sums[j] / r;
        let se = ((squares[j] / r - mean * mean).max(0.0) / r).sqrt();
        let ok = (mean - full).abs() <= 3.0 * se;
        report.push(
            format!("threshold {}", setup.thresholds[j]),
            ok,
            format!("mean {mean:.5} vs full-sample {full:.5}, 3 s.e. = {:.5}", 3.0 * se),
        );
    }
    Ok(report)
}

/// Random `(k, G, C0)` triples against the closed-form root.
pub fn threshold_root(triples: usize, seed: u64) -> Result<SuiteReport> {
    let c = Constants::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_residual, mut range_fail, mut monotone_fail) = (0.0f64, 0, 0);
    for _ in 0..triples {
        let k = rng.gen_range(2..=100_000usize);
        let c0 = 2.0 + rng.gen::<f64>() * 48.0;
        let eps = c0 * (k as f64).ln() / (k - 1) as f64;
        let trigger = eps.sqrt() + eps;
        // gaps from just above the trigger to far beyond it
        let g = trigger * (1.0 + 10f64.powf(rng.gen_range(-6.0..4.0)));
        let s = solve_root(&c, eps, g);
        let residual = (threshold_rhs(&c, eps, s) - g).abs() / g.max(1.0);
        worst_residual = worst_residual.max(residual);
        if !(s > 0.0 && s < 1.0) {
            range_fail += 1;
        }
        let s2 = solve_root(&c, eps, g * (1.0 + rng.gen::<f64>()));
        if s2 > s {
            monotone_fail += 1;
        }
    }
    let mut report = SuiteReport::new("root");
    report.push("back-substitution", worst_residual < 1e-9, format!("worst relative residual {worst_residual:.3e}"));
    report.push("range", range_fail == 0, format!("{range_fail} roots outside (0, 1)"));
    report.push("monotone in G", monotone_fail == 0, format!("{monotone_fail} increases"));
    // the floor concerns small k and gaps that can actually occur there
    let (mut floor_fail, mut floor_checked) = (0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF100);
    for _ in 0..triples {
        let k = rng.gen_range(2..=50usize);
        let c0 = 2.0 + rng.gen::<f64>() * 48.0;
        let eps = c0 * (k as f64).ln() / (k - 1) as f64;
        // the largest gap an empirical error difference can reach by round k
        let g_max = 2.0 * ((k - 1) as f64).powi(k as i32 - 1);
        let trigger = eps.sqrt() + eps;
        if g_max <= trigger {
            // every reachable gap triggers a certain query
            continue;
        }
        let g = trigger + rng.gen::<f64>() * (g_max - trigger);
        floor_checked += 1;
        if solve_root(&c, eps, g) < (k as f64).powi(-(k as i32)) {
            floor_fail += 1;
        }
    }
    report.push("floor 1/k^k", floor_fail == 0, format!("{floor_fail} of {floor_checked} below the floor"));
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct CoverageSetup {
    pub n: usize,
    pub trials: usize,
    pub ts: Vec<f64>,
    /// Fixed query probability `p(·)`.
    pub p: f64,
    pub hypothesis: f64,
}

impl Default for CoverageSetup {
    fn default() -> Self {
        Self { n: 200, trials: 10_000, ts: vec![4.0, 8.0, 12.0], p: 0.5, hypothesis: 0.3 }
    }
}

/// Coverage of the martingale deviation bound for `f = 1[h(x) ≠ y]` with a
/// fixed threshold hypothesis and a fixed query probability.
pub fn deviation_coverage(setup: &CoverageSetup, seed: u64) -> Result<SuiteReport> {
    let dist = DataDistribution::noisy_threshold(0.5, 0.1)?;
    let h = HypothesisForm::threshold(setup.hypothesis);
    let truth = dist.exact_error(&h)?;
    let p = setup.p;
    if !(p > 0.0 && p <= 1.0) {
        return Err(crate::error::Error::InvalidProbability(p));
    }
    let r_max = 1.0 / p;

    let exceed: Vec<Vec<bool>> = (0..setup.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<bool>> {
            let mut stream = draw_stream(&dist, setup.n, seed.wrapping_add(1 + trial as u64))?;
            let mut coins = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
            let (mut total, mut r_n) = (0.0, 1.0f64);
            for (x, y) in stream.by_ref() {
                let mistake = h.evaluate(&x)? != y.reveal();
                if mistake {
                    r_n = r_n.max(1.0 / p);
                }
                if coins.gen::<f64>() < p && mistake {
                    total += 1.0 / p;
                }
            }
            let dev = (total / setup.n as f64 - truth).abs();
            setup
                .ts
                .iter()
                .map(|&t| Ok(dev > deviation_bound(&DeviationParams::new(t, setup.n, r_max, r_n)?)))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut report = SuiteReport::new("coverage");
    let m = setup.trials as f64;
    for (j, &t) in setup.ts.iter().enumerate() {
        let freq = exceed.iter().filter(|e| e[j]).count() as f64 / m;
        let allowed = deviation_failure_probability(t, r_max);
        let q = allowed.min(1.0);
        let slack = 3.0 * (q * (1.0 - q) / m).sqrt();
        report.push(
            format!("t = {t}"),
            freq <= allowed + slack,
            format!("exceedance {freq:.5} vs allowed {allowed:.5} + {slack:.5}"),
        );
    }
    Ok(report)
}

fn scan_loss(form: &HypothesisForm, data: &[(Point, Label, f64)]) -> f64 {
    let mut total = 0.0;
    for (x, y, w) in data {
        if form.evaluate(x).expect("matching dimension") != *y {
            total += w;
        }
    }
    total
}

/// Index of the lowest loss, lowest index on ties, over allowed hypotheses.
fn scan_argmin(losses: &[f64], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &l) in losses.iter().enumerate() {
        if allowed(i) && best.is_none_or(|b| l < losses[b]) {
            best = Some(i);
        }
    }
    best
}

/// Random classes and weighted samples against a plain scan.
pub fn erm_equivalence(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mismatches: Vec<String> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<Option<String>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let size = rng.gen_range(2..=1000usize);
            let forms: Vec<HypothesisForm> = (0..size)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        // coarse values force ties between distinct hypotheses
                        HypothesisForm::Threshold {
                            threshold: (rng.gen_range(0..=40) as f64) / 40.0,
                            above: if rng.gen_bool(0.8) { Label::Positive } else { Label::Negative },
                        }
                    } else {
                        let a = rng.gen_range(0..=40) as f64 / 40.0;
                        let b = rng.gen_range(0..=40) as f64 / 40.0;
                        HypothesisForm::Interval { lo: a.min(b), hi: a.max(b), inside: Label::Positive }
                    }
                })
                .collect();
            let class = HypothesisClass::new(forms.clone())?;
            let len = rng.gen_range(0..=1000usize);
            let rounds = len + rng.gen_range(0..=len.max(1));
            let integral = rng.gen_bool(0.5);
            let data: Vec<(Point, Label, f64)> = (0..len)
                .map(|_| {
                    let x = Point::scalar(rng.gen_range(0..=80) as f64 / 80.0);
                    let y = if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative };
                    let w = if integral { rng.gen_range(1..=4) as f64 } else { 1.0 / rng.gen_range(0.05..=1.0) };
                    (x, y, w)
                })
                .collect();
            let mut sample = WeightedSample::new();
            let mut oracle = IncrementalOracle::new(&class);
            let mut stored = 0;
            for r in 0..rounds {
                // spread stored examples over the rounds
                let store = stored < len && (rounds - r <= len - stored || rng.gen_bool(0.5));
                if store {
                    let (x, y, w) = data[stored].clone();
                    let ex = sample.record_round(Some((x, y, w)))?.cloned().expect("stored");
                    oracle.observe(&class, &ex)?;
                    stored += 1;
                } else {
                    sample.record_round(None)?;
                }
            }

            let losses: Vec<f64> = forms.iter().map(|f| scan_loss(f, &data)).collect();
            let expect = scan_argmin(&losses, |_| true).expect("non-empty class");
            let got = erm(&class, &sample)?;
            let fast = oracle.erm(&class, &sample)?;
            if got.id != expect || fast.id != expect || fast.loss != losses[expect] {
                return Ok(Some(format!("instance {i}: erm {} / incremental {} vs scan {expect}", got.id, fast.id)));
            }
            let x = Point::scalar(rng.gen_range(0..=80) as f64 / 80.0);
            let forbidden = forms[expect].evaluate(&x)?;
            let expect2 = scan_argmin(&losses, |j| forms[j].evaluate(&x).expect("1-d") != forbidden);
            let got2 = erm_with_disagreement(&class, &sample, &x, forbidden)?.map(|h| h.id);
            let fast2 = oracle.erm_with_disagreement(&class, &sample, &x, forbidden)?;
            if got2 != expect2 || fast2.map(|f| f.id) != expect2 || fast2.map(|f| f.loss) != expect2.map(|j| losses[j])
            {
                return Ok(Some(format!(
                    "instance {i}: constrained {got2:?} / {:?} vs scan {expect2:?}",
                    fast2.map(|f| f.id)
                )));
            }
            Ok(None)
        })
        .filter_map(|r| r.transpose())
        .collect::<Result<_>>()?;
    let mut report = SuiteReport::new("erm");
    report.push(
        format!("{instances} random instances"),
        mismatches.is_empty(),
        mismatches.first().cloned().unwrap_or_else(|| "all match the exhaustive scan".into()),
    );
    Ok(report)
}

/// θ of 101 thresholds under the uniform marginal, which is exactly 2.
pub fn theta_thresholds() -> Result<SuiteReport> {
    let class = HypothesisClass::threshold_grid(101, 0.0, 1.0)?;
    let dist = DataDistribution::noisy_threshold(0.5, 0.0)?;
    let grid: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
    let profile = disagreement_coefficient(&class, &dist, 50, &grid)?;
    let mut report = SuiteReport::new("theta");
    report.push("grid theta", (profile.theta - 2.0).abs() <= 0.1, format!("theta = {:.6}", profile.theta));
    report.push("exact supremum", (profile.theta_sup - 2.0).abs() <= 0.1, format!("sup = {:.6}", profile.theta_sup));
    Ok(report)
}
