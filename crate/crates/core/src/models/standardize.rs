use nalgebra::{DMatrix, DVector};

use super::{CoefficientMatrix, Hyperparams, Model};
use crate::data::{MultiTaskDataset, TaskDataset};
use crate::error::Result;

/// Per-task feature centering/scaling and target centering, estimated on
/// training data. Coefficients fitted on the transformed data map back to
/// raw-feature coefficients plus a per-task offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub x_mean: Vec<DVector<f64>>,
    pub x_scale: Vec<DVector<f64>>,
    pub y_mean: Vec<f64>,
}

impl Standardization {
    pub fn fit(ds: &MultiTaskDataset) -> Self {
        let mut x_mean = Vec::new();
        let mut x_scale = Vec::new();
        let mut y_mean = Vec::new();
        for t in ds.tasks() {
            let n = t.n_samples().max(1) as f64;
            let mean = DVector::from_iterator(t.n_features(), t.x.column_iter().map(|c| c.sum() / n));
            let scale = DVector::from_iterator(
                t.n_features(),
                t.x.column_iter().zip(mean.iter()).map(|(c, mu)| {
                    let sd = (c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
                    if sd > 0.0 {
                        sd
                    } else {
                        1.0
                    }
                }),
            );
            x_mean.push(mean);
            x_scale.push(scale);
            y_mean.push(t.y.sum() / n);
        }
        Standardization { x_mean, x_scale, y_mean }
    }

    /// The no-op transform.
    pub fn identity(ds: &MultiTaskDataset) -> Self {
        Standardization {
            x_mean: ds.tasks().iter().map(|t| DVector::zeros(t.n_features())).collect(),
            x_scale: ds.tasks().iter().map(|t| DVector::from_element(t.n_features(), 1.0)).collect(),
            y_mean: vec![0.0; ds.n_tasks()],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.y_mean.iter().all(|v| *v == 0.0)
            && self.x_mean.iter().all(|m| m.iter().all(|v| *v == 0.0))
            && self.x_scale.iter().all(|s| s.iter().all(|v| *v == 1.0))
    }

    fn transform_x(&self, task: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (mean, scale) = (&self.x_mean[task], &self.x_scale[task]);
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - mean[j]) / scale[j])
    }

    /// Raters are left untouched; the disagreement weight depends only on
    /// their spread.
    pub fn apply(&self, ds: &MultiTaskDataset) -> Result<MultiTaskDataset> {
        if self.is_identity() {
            return Ok(ds.clone());
        }
        let tasks = ds
            .tasks()
            .iter()
            .enumerate()
            .map(|(m, t)| {
                TaskDataset::new(
                    t.task_id,
                    t.name.clone(),
                    self.transform_x(m, &t.x),
                    t.y.add_scalar(-self.y_mean[m]),
                    t.raters.clone(),
                    t.sample_ids.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        MultiTaskDataset::new(tasks)
    }

    /// Expresses coefficients fitted on standardized data on raw features.
    pub fn to_model(&self, w: &CoefficientMatrix, hyperparams: Hyperparams) -> Result<Model> {
        let mut raw = w.values.clone();
        let mut intercepts = Vec::with_capacity(raw.ncols());
        for (m, mut col) in raw.column_iter_mut().enumerate() {
            col.component_div_assign(&self.x_scale[m]);
            intercepts.push(self.y_mean[m] - col.dot(&self.x_mean[m]));
        }
        Ok(Model {
            coefficients: CoefficientMatrix::new(raw, w.task_names.clone())?,
            intercepts,
            hyperparams,
        })
    }
}
