//! Score-difference metrics, accuracy-vs-threshold curves and k-fold
//! cross-validation.

mod cv;
mod metrics;

pub use cv::{fit_method, kfold_split, run_cv, CvOptions, EvalReport, FoldReport, GraphMode, Method};
pub use metrics::{
    accuracy_curve, default_thresholds, mean_abs_diff, within_threshold_accuracy, CurvePoint,
};
