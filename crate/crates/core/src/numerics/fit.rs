//! Least-squares power-law fits on log-log axes.

use serde::{Deserialize, Serialize};

/// Fit of `log y = intercept + slope · log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits below this coefficient of determination are flagged.
pub const MIN_R_SQUARED: f64 = 0.98;

impl FitResult {
    pub fn flagged(&self) -> bool {
        !(self.r_squared >= MIN_R_SQUARED)
    }
}

/// Ordinary least squares of `ln y` against `ln x`, skipping pairs with a
/// non-positive or non-finite coordinate. Returns `None` with fewer than two
/// usable points or a degenerate abscissa.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<FitResult> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Some(FitResult { slope, intercept, r_squared, points: n })
}

/// `max / min` of a set of positive empirical constants; infinite when any
/// entry is non-positive.
pub fn constant_range(values: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &v in values {
        if !(v > 0.0) || !v.is_finite() {
            return f64::INFINITY;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo.is_infinite() {
        return f64::INFINITY;
    }
    hi / lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..6).map(|k| 2f64.powi(-k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 1.7).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(!fit.flagged());
    }

    #[test]
    fn too_few_points() {
        assert!(loglog_fit(&[1.0], &[1.0]).is_none());
        assert!(loglog_fit(&[1.0, -1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn range_of_constants() {
        assert_eq!(constant_range(&[1.0, 2.0, 4.0]), 4.0);
        assert!(constant_range(&[1.0, 0.0]).is_infinite());
    }
}
