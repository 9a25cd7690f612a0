//! Small regression helpers for calibrating bound shapes on measurements.

use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("slope needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("log-log fit needs two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Non-negative least squares for `y ≈ a·f(x) + b·g(x)`.
pub fn fit_two_term(xs: &[f64], ys: &[f64], f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidParameter("fit needs paired, non-empty data".into()));
    }
    let fv: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let gv: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let (ff, gg, fg) = (dot(&fv, &fv), dot(&gv, &gv), dot(&fv, &gv));
    let (fy, gy) = (dot(&fv, ys), dot(&gv, ys));
    let sse =
        |a: f64, b: f64| ys.iter().zip(fv.iter().zip(&gv)).map(|(y, (p, q))| (y - a * p - b * q).powi(2)).sum::<f64>();

    let mut candidates = vec![(0.0, 0.0)];
    if ff > 0.0 {
        candidates.push(((fy / ff).max(0.0), 0.0));
    }
    if gg > 0.0 {
        candidates.push((0.0, (gy / gg).max(0.0)));
    }
    let det = ff * gg - fg * fg;
    if det.abs() > 1e-12 * ff * gg {
        let a = (fy * gg - gy * fg) / det;
        let b = (gy * ff - fy * fg) / det;
        if a >= 0.0 && b >= 0.0 {
            candidates.push((a, b));
        }
    }
    Ok(candidates
        .into_iter()
        .min_by(|p, q| sse(p.0, p.1).partial_cmp(&sse(q.0, q.1)).expect("finite residuals"))
        .expect("origin is always a candidate"))
}

/// Median of a non-empty slice (average of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 100.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        assert_relative_eq!(loglog_slope(&xs, &ys).unwrap(), 0.5, max_relative = 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(loglog_slope(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn two_term_recovers_coefficients() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64 * 50.0).collect();
        let f = |n: f64| (n * n.ln()).sqrt();
        let g = |n: f64| n.ln().powi(3);
        let ys: Vec<f64> = xs.iter().map(|&x| 1.5 * f(x) + 0.25 * g(x)).collect();
        let (a, b) = fit_two_term(&xs, &ys, f, g).unwrap();
        assert_relative_eq!(a, 1.5, max_relative = 1e-6);
        assert_relative_eq!(b, 0.25, max_relative = 1e-6);
        // a negative unconstrained solution is clamped
        let ys: Vec<f64> = xs.iter().map(|&x| 2.0 * f(x) - 0.5 * g(x)).collect();
        let (a, b) = fit_two_term(&xs, &ys, f, g).unwrap();
        assert!(a >= 0.0 && b >= 0.0 && (a == 0.0 || b == 0.0), "{a} {b}");
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
