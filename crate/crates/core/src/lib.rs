//! Graph-regularized sparse multi-task least squares.
//!
//! Each task `m` owns a feature matrix `X_m` (n x d) and a score vector `Y_m`.
//! The coefficient vectors are stacked as the columns of a d x M matrix `W`
//! and fitted jointly by minimising
//!
//! ```text
//!   sum_m ||(X_m + Psi_m) W_m - Y_m||^2 + rho1 ||W S||_F^2 + rho2 ||W||_1
//! ```
//!
//! where `S` is the edge-incidence matrix of a task graph and `Psi_m` is a
//! per-sample rater-disagreement weight. Plain lasso and trace-norm
//! multi-task fits are provided as baselines, all driven by the same
//! accelerated proximal gradient engine in [`solver`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consistency;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod models;
pub mod solver;

pub use consistency::{augment_features, compute_psi, inconsistency_score, PsiVector};
pub use data::{
    filter_indeterminate, generate_synthetic, load_features, load_multitask_dataset, write_multitask_dataset,
    Filtered, MultiTaskDataset, SyntheticSpec, TaskDataset,
};
pub use error::{Error, Result};
pub use evaluation::{
    accuracy_curve, fit_method, kfold_split, mean_abs_diff, run_cv, within_threshold_accuracy, CvOptions,
    EvalReport, GraphMode, Method,
};
pub use graph::{estimate_structure, graph_penalty, structure_matrix, TaskGraph};
pub use models::{
    graph_sparse_mtl_fit, lasso_fit, lasso_solve, objective_value, predict, trace_mtl_fit, trace_mtl_solve, CoefficientMatrix,
    Hyperparams, Model, ObjectiveTerms, Solution, Standardization,
};
pub use solver::{apg_solve, singular_value_threshold, soft_threshold, ApgResult, SolverConfig};
