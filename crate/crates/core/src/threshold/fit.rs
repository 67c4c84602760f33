use serde::{Deserialize, Serialize};

use super::{ExperimentResult, Z95};
use crate::error::{Error, Result};

/// Points with fewer failures carry too little information for a log-scale
/// fit and are dropped.
pub const MIN_FAILURES: u64 = 10;

/// Result of fitting `p_L = C p^slope` on a log-log scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    /// Coefficient of the slope-2 fit.
    pub c: f64,
    pub c_ci_low: f64,
    pub c_ci_high: f64,
    /// `1 / c`.
    pub p_t: f64,
    pub p_t_ci_low: f64,
    pub p_t_ci_high: f64,
    /// Exponent of the free fit.
    pub slope: f64,
    pub slope_stderr: f64,
    /// `ln C` of the free fit.
    pub free_intercept: f64,
    /// `ln p_L − ln(C p²)` per used point.
    pub residuals: Vec<f64>,
    pub points_used: Vec<f64>,
    pub points_excluded: Vec<f64>,
}

impl ThresholdFit {
    /// Rate predicted by the slope-2 law.
    pub fn predict(&self, p: f64) -> f64 {
        self.c * p * p
    }
}

/// Weighted least squares of `ln p_L` against `ln p`. A point's weight is the
/// inverse delta-method variance of `ln p̂`, i.e. `failures / (1 − p̂)`.
pub fn fit_threshold(points: &[(f64, ExperimentResult)]) -> Result<ThresholdFit> {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for &(p, r) in points {
        if !(p > 0.0) {
            return Err(Error::Precondition(format!("physical rate must be positive, got {p}")));
        }
        if r.failures < MIN_FAILURES || r.p_logical >= 1.0 {
            log::warn!(
                "fit: dropping p = {p} ({} failures, need {MIN_FAILURES})",
                r.failures
            );
            excluded.push(p);
        } else {
            used.push((p, r));
        }
    }
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points with at least {MIN_FAILURES} failures, need 3",
            used.len()
        )));
    }

    let xs: Vec<f64> = used.iter().map(|(p, _)| p.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|(_, r)| r.p_logical.ln()).collect();
    let ws: Vec<f64> = used
        .iter()
        .map(|(_, r)| r.failures as f64 / (1.0 - r.p_logical))
        .collect();

    let sw: f64 = ws.iter().sum();
    let sx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x).sum();
    let sy: f64 = ws.iter().zip(&ys).map(|(w, y)| w * y).sum();
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    if det <= 0.0 {
        return Err(Error::InsufficientData("all points at the same p".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let free_intercept = (sy - slope * sx) / sw;
    let slope_stderr = (sw / det).sqrt();

    let ln_c = ws
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(w, (x, y))| w * (y - 2.0 * x))
        .sum::<f64>()
        / sw;
    let half = Z95 / sw.sqrt();
    let c = ln_c.exp();
    let (c_ci_low, c_ci_high) = ((ln_c - half).exp(), (ln_c + half).exp());
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - ln_c - 2.0 * x).collect();

    Ok(ThresholdFit {
        c,
        c_ci_low,
        c_ci_high,
        p_t: 1.0 / c,
        p_t_ci_low: 1.0 / c_ci_high,
        p_t_ci_high: 1.0 / c_ci_low,
        slope,
        slope_stderr,
        free_intercept,
        residuals,
        points_used: used.iter().map(|(p, _)| *p).collect(),
        points_excluded: excluded,
    })
}
