//! Weighted straight-line fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub slope_halfwidth: f64,
    pub points: usize,
}

/// Weighted least squares fit of `y = intercept + slope * x`.
///
/// Weights are relative: the residual scale is estimated from the data, so the
/// confidence half-width uses a Student-t quantile with `n - 2` degrees of freedom.
pub fn weighted_line_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n || weights.len() != n {
        return Err(Error::InsufficientData { usable: n.min(ys.len()), required: 2 });
    }
    let w_sum: f64 = weights.iter().sum();
    let x_mean = xs.iter().zip(weights).map(|(x, w)| w * x).sum::<f64>() / w_sum;
    let y_mean = ys.iter().zip(weights).map(|(y, w)| w * y).sum::<f64>() / w_sum;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(weights) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::Domain("regression abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - rss / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_halfwidth = if n > 2 {
        let dof = (n - 2) as f64;
        let t = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(1.96);
        t * (rss / dof / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(LineFit { slope, intercept, r_squared, slope_halfwidth, points: n })
}
