//! Coefficient matrices, the three least-squares objectives, and fitted
//! model serialization.

mod fit;
mod standardize;

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::MultiTaskDataset;
use crate::error::{Error, Result};

pub use fit::{
    graph_sparse_mtl_fit, lasso_fit, lasso_solve, objective_value, trace_mtl_fit, trace_mtl_solve,
    GraphSparseObjective, ObjectiveTerms, Solution,
};
pub use standardize::Standardization;

/// `d x M` matrix whose column `m` is the coefficient vector of task `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub values: DMatrix<f64>,
    pub task_names: Vec<String>,
}

impl CoefficientMatrix {
    pub fn new(values: DMatrix<f64>, task_names: Vec<String>) -> Result<Self> {
        if values.ncols() != task_names.len() {
            return Err(Error::Dimension(format!(
                "{} coefficient columns for {} task names",
                values.ncols(),
                task_names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("coefficient matrix has non-finite entries".into()));
        }
        Ok(CoefficientMatrix { values, task_names })
    }

    pub fn zeros(d: usize, task_names: Vec<String>) -> Self {
        CoefficientMatrix {
            values: DMatrix::zeros(d, task_names.len()),
            task_names,
        }
    }

    pub fn n_features(&self) -> usize {
        self.values.nrows()
    }

    pub fn task_index(&self, name: &str) -> Result<usize> {
        self.task_names
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| Error::Lookup {
                kind: "task",
                name: name.to_string(),
            })
    }

    pub fn column(&self, task: &str) -> Result<DVector<f64>> {
        Ok(self.values.column(self.task_index(task)?).clone_owned())
    }

    pub fn nonzeros(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

/// Regularization weights.
///
/// `lambda`: plain lasso; `rho`: trace norm; `rho1`: graph coupling;
/// `rho2`: l1 term of the graph model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub psi_enabled: bool,
}

impl Hyperparams {
    /// `lambda = rho2 = 0.01 * max_m 2 ||X_m^T Y_m||_inf`, `rho = rho1 = 1`.
    pub fn defaults_for(ds: &MultiTaskDataset) -> Self {
        let l1 = 0.01 * lambda_max(ds);
        Hyperparams {
            lambda: l1,
            rho: 1.0,
            rho1: 1.0,
            rho2: l1,
            psi_enabled: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Smallest l1 weight at which the all-zero lasso solution is optimal for
/// every task: `max_m 2 ||X_m^T Y_m||_inf`.
pub fn lambda_max(ds: &MultiTaskDataset) -> f64 {
    ds.tasks()
        .iter()
        .map(|t| 2.0 * (t.x.transpose() * &t.y).amax())
        .fold(0.0, f64::max)
}

/// `x . W_task`. No clamping to the score range.
pub fn predict(w: &CoefficientMatrix, task_name: &str, x: &[f64]) -> Result<f64> {
    let t = w.task_index(task_name)?;
    if x.len() != w.n_features() {
        return Err(Error::Dimension(format!(
            "feature vector has length {}, model expects {}",
            x.len(),
            w.n_features()
        )));
    }
    Ok(w.values.column(t).iter().zip(x).map(|(a, b)| a * b).sum())
}

/// A fitted model expressed on raw features: `score = x . W_task + offset_task`.
/// Offsets are zero unless the fit ran on standardized data.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub coefficients: CoefficientMatrix,
    pub intercepts: Vec<f64>,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    task_names: Vec<String>,
    d: usize,
    columns: Vec<Vec<f64>>,
    #[serde(default)]
    intercepts: Option<Vec<f64>>,
    hyperparams: Hyperparams,
}

impl Model {
    pub fn predict(&self, task_name: &str, x: &[f64]) -> Result<f64> {
        let t = self.coefficients.task_index(task_name)?;
        Ok(predict(&self.coefficients, task_name, x)? + self.intercepts[t])
    }

    /// Scores for every row of `x`.
    pub fn predict_rows(&self, task_name: &str, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        let t = self.coefficients.task_index(task_name)?;
        if x.ncols() != self.coefficients.n_features() {
            return Err(Error::Dimension(format!(
                "features have d={}, model has d={}",
                x.ncols(),
                self.coefficients.n_features()
            )));
        }
        Ok((x * self.coefficients.values.column(t)).add_scalar(self.intercepts[t]))
    }

    pub fn to_json(&self) -> String {
        let w = &self.coefficients;
        let file = ModelFile {
            task_names: w.task_names.clone(),
            d: w.n_features(),
            columns: w.values.column_iter().map(|c| c.iter().copied().collect()).collect(),
            intercepts: Some(self.intercepts.clone()),
            hyperparams: self.hyperparams,
        };
        serde_json::to_string_pretty(&file).expect("model serialization")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        use serde::de::Error as _;
        let file: ModelFile = serde_json::from_str(text)?;
        let m = file.task_names.len();
        if file.columns.len() != m || file.columns.iter().any(|c| c.len() != file.d) {
            return Err(serde_json::Error::custom(format!(
                "expected {m} columns of length {}",
                file.d
            )));
        }
        let intercepts = file.intercepts.unwrap_or_else(|| vec![0.0; m]);
        if intercepts.len() != m {
            return Err(serde_json::Error::custom("one intercept per task expected"));
        }
        let values = DMatrix::from_fn(file.d, m, |i, j| file.columns[j][i]);
        let coefficients = CoefficientMatrix::new(values, file.task_names).map_err(serde_json::Error::custom)?;
        Ok(Model {
            coefficients,
            intercepts,
            hyperparams: file.hyperparams,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::json(path, e))
    }
}
