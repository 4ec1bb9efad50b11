use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{CoefficientMatrix, Hyperparams};
use crate::consistency::{augment_features, compute_psi};
use crate::data::MultiTaskDataset;
use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::solver::{apg_solve, singular_value_threshold, soft_threshold, ApgResult, SolverConfig};

/// Fitted coefficients plus the solver's convergence record.
#[derive(Debug, Clone)]
pub struct Solution {
    pub w: CoefficientMatrix,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_rel_change: f64,
}

impl Solution {
    fn from_apg(res: ApgResult, task_names: Vec<String>) -> Result<Self> {
        Ok(Solution {
            w: CoefficientMatrix::new(res.w, task_names)?,
            objective_trace: res.objective_trace,
            iterations: res.iterations,
            converged: res.converged,
            final_rel_change: res.final_rel_change,
        })
    }

    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Lasso `||X w - y||^2 + lambda ||w||_1`, returning the full solver record.
pub fn lasso_solve(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, cfg: &SolverConfig) -> Result<ApgResult> {
    if x.nrows() == 0 {
        return Err(Error::EmptyData("lasso needs at least one sample".into()));
    }
    if y.len() != x.nrows() {
        return Err(Error::Dimension(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("lambda must be >= 0, got {lambda}")));
    }
    let y = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    apg_solve(
        |w| (x * w - &y).norm_squared(),
        |w| x.tr_mul(&(x * w - &y)) * 2.0,
        |v, step| Ok(soft_threshold(v, step * lambda)),
        |w| lambda * w.abs().sum(),
        DMatrix::zeros(x.ncols(), 1),
        cfg,
    )
}

pub fn lasso_fit(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, cfg: &SolverConfig) -> Result<DVector<f64>> {
    let res = lasso_solve(x, y, lambda, cfg)?;
    Ok(res.w.column(0).clone_owned())
}

/// The three terms of the graph-regularized objective and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveTerms {
    pub loss: f64,
    pub graph: f64,
    pub sparsity: f64,
    pub total: f64,
}

/// `sum_m ||X~_m W_m - Y_m||^2 + rho1 tr(W L W^T) + rho2 ||W||_1`, where
/// `X~_m` is `X_m` plus the rater-disagreement weight when enabled.
#[derive(Debug, Clone)]
pub struct GraphSparseObjective {
    xs: Vec<DMatrix<f64>>,
    ys: Vec<DVector<f64>>,
    laplacian: DMatrix<f64>,
    rho1: f64,
    rho2: f64,
    d: usize,
}

impl GraphSparseObjective {
    pub fn new(ds: &MultiTaskDataset, g: &TaskGraph, hp: &Hyperparams) -> Result<Self> {
        hp.validate()?;
        let d = ds.common_dim()?;
        if g.n_tasks() != ds.n_tasks() {
            return Err(Error::Dimension(format!(
                "graph has {} nodes, dataset has {} tasks",
                g.n_tasks(),
                ds.n_tasks()
            )));
        }
        let xs = ds
            .tasks()
            .iter()
            .map(|t| {
                if hp.psi_enabled {
                    augment_features(&t.x, &compute_psi(t)?, true)
                } else {
                    Ok(t.x.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphSparseObjective {
            xs,
            ys: ds.tasks().iter().map(|t| t.y.clone()).collect(),
            laplacian: g.laplacian().clone(),
            rho1: hp.rho1,
            rho2: hp.rho2,
            d,
        })
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn n_tasks(&self) -> usize {
        self.xs.len()
    }

    /// Feature matrices actually used in the loss (after augmentation).
    pub fn design(&self, task: usize) -> &DMatrix<f64> {
        &self.xs[task]
    }

    pub fn check_shape(&self, w: &DMatrix<f64>) -> Result<()> {
        if w.shape() != (self.d, self.xs.len()) {
            return Err(Error::Dimension(format!(
                "W is {}x{}, expected {}x{}",
                w.nrows(),
                w.ncols(),
                self.d,
                self.xs.len()
            )));
        }
        Ok(())
    }

    pub fn loss(&self, w: &DMatrix<f64>) -> f64 {
        self.xs
            .iter()
            .zip(&self.ys)
            .enumerate()
            .map(|(m, (x, y))| (x * w.column(m) - y).norm_squared())
            .sum()
    }

    pub fn graph_term(&self, w: &DMatrix<f64>) -> f64 {
        if self.rho1 == 0.0 || self.laplacian.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        self.rho1 * (w * &self.laplacian).component_mul(w).sum()
    }

    pub fn smooth_value(&self, w: &DMatrix<f64>) -> f64 {
        self.loss(w) + self.graph_term(w)
    }

    /// Column `m`: `2 X~_m^T (X~_m W_m - Y_m) + 2 rho1 (W L)_m`.
    pub fn smooth_gradient(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let mut grad = if self.rho1 == 0.0 {
            DMatrix::zeros(w.nrows(), w.ncols())
        } else {
            w * &self.laplacian * (2.0 * self.rho1)
        };
        for (m, (x, y)) in self.xs.iter().zip(&self.ys).enumerate() {
            let r = x * w.column(m) - y;
            let mut col = grad.column_mut(m);
            col += x.tr_mul(&r) * 2.0;
        }
        grad
    }

    pub fn nonsmooth_value(&self, w: &DMatrix<f64>) -> f64 {
        self.rho2 * w.abs().sum()
    }

    pub fn terms(&self, w: &DMatrix<f64>) -> ObjectiveTerms {
        let loss = self.loss(w);
        let graph = self.graph_term(w);
        let sparsity = self.nonsmooth_value(w);
        ObjectiveTerms {
            loss,
            graph,
            sparsity,
            total: loss + graph + sparsity,
        }
    }
}

/// Graph-regularized sparse multi-task fit: rater weights (when enabled),
/// feature augmentation, then accelerated proximal gradient from `W = 0`.
pub fn graph_sparse_mtl_fit(
    ds: &MultiTaskDataset,
    g: &TaskGraph,
    hp: &Hyperparams,
    cfg: &SolverConfig,
) -> Result<Solution> {
    if hp.psi_enabled && !ds.has_raters() {
        return Err(Error::Precondition(
            "psi is enabled but not every task has rater scores; supply a raters file or disable psi".into(),
        ));
    }
    let obj = GraphSparseObjective::new(ds, g, hp)?;
    let rho2 = obj.rho2;
    let res = apg_solve(
        |w| obj.smooth_value(w),
        |w| obj.smooth_gradient(w),
        |v, step| Ok(soft_threshold(v, step * rho2)),
        |w| obj.nonsmooth_value(w),
        DMatrix::zeros(obj.n_features(), obj.n_tasks()),
        cfg,
    )?;
    Solution::from_apg(res, ds.task_names())
}

pub fn objective_value(
    w: &CoefficientMatrix,
    ds: &MultiTaskDataset,
    g: &TaskGraph,
    hp: &Hyperparams,
) -> Result<ObjectiveTerms> {
    let obj = GraphSparseObjective::new(ds, g, hp)?;
    obj.check_shape(&w.values)?;
    Ok(obj.terms(&w.values))
}

/// Trace-norm multi-task fit `sum_m ||X_m W_m - Y_m||^2 + rho ||W||_*`.
pub fn trace_mtl_solve(ds: &MultiTaskDataset, rho: f64, cfg: &SolverConfig) -> Result<Solution> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Argument(format!("rho must be >= 0, got {rho}")));
    }
    let plain = Hyperparams {
        lambda: 0.0,
        rho,
        rho1: 0.0,
        rho2: 0.0,
        psi_enabled: false,
    };
    let obj = GraphSparseObjective::new(ds, &TaskGraph::empty(ds.n_tasks())?, &plain)?;
    let res = apg_solve(
        |w| obj.loss(w),
        |w| obj.smooth_gradient(w),
        |v, step| singular_value_threshold(v, step * rho),
        |w| if rho == 0.0 { 0.0 } else { rho * w.singular_values().sum() },
        DMatrix::zeros(obj.n_features(), obj.n_tasks()),
        cfg,
    )?;
    Solution::from_apg(res, ds.task_names())
}

pub fn trace_mtl_fit(ds: &MultiTaskDataset, rho: f64, cfg: &SolverConfig) -> Result<CoefficientMatrix> {
    Ok(trace_mtl_solve(ds, rho, cfg)?.w)
}
