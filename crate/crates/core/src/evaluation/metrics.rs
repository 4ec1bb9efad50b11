use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub accuracy: f64,
}

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::EmptyData("no predictions to score".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} true scores",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Slack on the inclusive comparison so decimal scores on the boundary
/// (e.g. `|3.4 - 4.0|` against 0.6) count as inside.
const BOUNDARY_TOL: f64 = 1e-12;

/// Fraction of samples with `|pred - truth| <= threshold`.
pub fn within_threshold_accuracy(pred: &[f64], truth: &[f64], threshold: f64) -> Result<f64> {
    check_pair(pred, truth)?;
    if !(threshold >= 0.0) {
        return Err(Error::Argument(format!("threshold must be >= 0, got {threshold}")));
    }
    let hits = pred
        .iter()
        .zip(truth)
        .filter(|(p, t)| (*p - *t).abs() <= threshold + BOUNDARY_TOL * threshold.max(1.0))
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

pub fn mean_abs_diff(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

pub fn accuracy_curve(pred: &[f64], truth: &[f64], thresholds: &[f64]) -> Result<Vec<CurvePoint>> {
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Argument("curve thresholds must be sorted ascending".into()));
    }
    thresholds
        .iter()
        .map(|&threshold| {
            Ok(CurvePoint {
                threshold,
                accuracy: within_threshold_accuracy(pred, truth, threshold)?,
            })
        })
        .collect()
}

/// 0.1, 0.2, ..., 2.0.
pub fn default_thresholds() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 10.0).collect()
}
