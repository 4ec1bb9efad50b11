//! Rater-disagreement weights.
//!
//! For one sample with rater scores `x_1..x_r`, mean `mu` and population
//! variance `sigma^2`:
//!
//! ```text
//!   psi = exp( sum_i (x_i - mu)^2 / (2 sigma^2) )
//! ```
//!
//! Unanimous ratings (`sigma = 0`) give `psi = 1`. The weight is added to
//! every feature of that sample before fitting.

use nalgebra::DMatrix;

use crate::data::TaskDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PsiVector {
    pub task_id: usize,
    pub values: Vec<f64>,
}

impl PsiVector {
    /// Checks that every value is finite and at least 1.
    pub fn new(task_id: usize, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 1.0)) {
            return Err(Error::Argument(format!("psi value {v} is not a finite number >= 1")));
        }
        Ok(PsiVector { task_id, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn inconsistency_score(rater_scores: &[f64]) -> Result<f64> {
    let Some(&first) = rater_scores.first() else {
        return Err(Error::Argument("inconsistency score needs at least one rating".into()));
    };
    if rater_scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("rater scores must be finite".into()));
    }
    // Checked on the raw values: a computed mean can leave roundoff residue
    // for identical scores.
    if rater_scores.iter().all(|&v| v == first) {
        return Ok(1.0);
    }
    let r = rater_scores.len() as f64;
    let mean = rater_scores.iter().sum::<f64>() / r;
    let ss: f64 = rater_scores.iter().map(|v| (v - mean).powi(2)).sum();
    let var = ss / r;
    if var == 0.0 {
        return Ok(1.0);
    }
    Ok((ss / (2.0 * var)).exp())
}

pub fn compute_psi(ds: &TaskDataset) -> Result<PsiVector> {
    let raters = ds.raters.as_ref().ok_or_else(|| {
        Error::Precondition(format!(
            "task `{}` has no rater scores; supply a raters file or disable psi",
            ds.name
        ))
    })?;
    let values = raters
        .iter()
        .map(|r| inconsistency_score(r))
        .collect::<Result<Vec<_>>>()?;
    PsiVector::new(ds.task_id, values)
}

/// Adds `psi[j]` to every entry of row `j` when `enabled`.
pub fn augment_features(x: &DMatrix<f64>, psi: &PsiVector, enabled: bool) -> Result<DMatrix<f64>> {
    if psi.len() != x.nrows() {
        return Err(Error::Dimension(format!(
            "psi has {} entries for {} samples",
            psi.len(),
            x.nrows()
        )));
    }
    if !enabled {
        return Ok(x.clone());
    }
    let mut out = x.clone();
    for (mut row, &p) in out.row_iter_mut().zip(&psi.values) {
        row.add_scalar_mut(p);
    }
    Ok(out)
}
