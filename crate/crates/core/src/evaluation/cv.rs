use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy_curve, default_thresholds, mean_abs_diff, within_threshold_accuracy, CurvePoint};
use crate::data::MultiTaskDataset;
use crate::error::{Error, Result};
use crate::graph::{estimate_structure, TaskGraph};
use crate::models::{graph_sparse_mtl_fit, trace_mtl_solve, Hyperparams, Solution, Standardization};
use crate::solver::SolverConfig;

/// Shuffles `0..n` and cuts it into `k` folds whose sizes differ by at most
/// one. Indices within a fold are sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::Argument(format!("cannot split {n} samples into {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = idx[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

/// Where the task graph comes from inside each fold.
#[derive(Debug, Clone)]
pub enum GraphMode {
    /// Estimated on the training part of each fold, with `Hyperparams::lambda`
    /// as the lasso weight.
    Auto { corr_threshold: f64 },
    Fixed(TaskGraph),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The graph-regularized sparse model.
    GraphSparse,
    /// Trace-norm multi-task least squares with `Hyperparams::rho`.
    TraceNorm,
    /// Independent lasso per task with `Hyperparams::lambda`.
    Lasso,
}

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub method: Method,
    /// Standardize features (and center targets) with training-fold
    /// statistics.
    pub standardize: bool,
    pub thresholds: Vec<f64>,
    /// Run folds on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            method: Method::GraphSparse,
            standardize: false,
            thresholds: default_thresholds(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold_index: usize,
    pub n_test: usize,
    /// Accuracy at threshold 1.
    pub accuracy: f64,
    pub mean_abs_diff: f64,
    pub curve: Vec<CurvePoint>,
    pub edges: Vec<(usize, usize)>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target_task: String,
    pub method: Method,
    pub k: usize,
    pub seed: u64,
    pub per_fold: Vec<FoldReport>,
    /// Unweighted mean over folds.
    pub aggregate_accuracy: f64,
    pub aggregate_mean_abs_diff: f64,
    /// Over all held-out predictions at once.
    pub pooled_accuracy: f64,
    pub pooled_mean_abs_diff: f64,
    /// Fold-mean accuracy per threshold.
    pub curve: Vec<CurvePoint>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// `threshold,accuracy` rows.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("threshold,accuracy\n");
        for p in &self.curve {
            out.push_str(&format!("{},{}\n", p.threshold, p.accuracy));
        }
        out
    }

    pub fn all_converged(&self) -> bool {
        self.per_fold.iter().all(|f| f.converged)
    }
}

struct FoldOutcome {
    report: FoldReport,
    pred: Vec<f64>,
    truth: Vec<f64>,
}

/// Fits `method` on `train`; returns the solution and the graph edges used.
pub fn fit_method(
    train: &MultiTaskDataset,
    graph: &GraphMode,
    hp: &Hyperparams,
    cfg: &SolverConfig,
    method: Method,
) -> Result<(Solution, Vec<(usize, usize)>)> {
    let m = train.n_tasks();
    match method {
        Method::GraphSparse => {
            let g = match graph {
                GraphMode::Fixed(g) => g.clone(),
                GraphMode::Auto { corr_threshold } => estimate_structure(train, hp.lambda, *corr_threshold, cfg)?.graph,
            };
            let sol = graph_sparse_mtl_fit(train, &g, hp, cfg)?;
            Ok((sol, g.edges().to_vec()))
        }
        Method::TraceNorm => Ok((trace_mtl_solve(train, hp.rho, cfg)?, Vec::new())),
        Method::Lasso => {
            let independent = Hyperparams {
                rho1: 0.0,
                rho2: hp.lambda,
                psi_enabled: false,
                ..*hp
            };
            let sol = graph_sparse_mtl_fit(train, &TaskGraph::empty(m)?, &independent, cfg)?;
            Ok((sol, Vec::new()))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    ds: &MultiTaskDataset,
    folds: &[Vec<usize>],
    f: usize,
    graph: &GraphMode,
    hp: &Hyperparams,
    cfg: &SolverConfig,
    target: usize,
    opts: &CvOptions,
) -> Result<FoldOutcome> {
    let test_idx = &folds[f];
    let train_idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(g, _)| *g != f)
        .flat_map(|(_, fold)| fold.iter().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let train = ds.subset(&train_idx);
    let test = ds.subset(test_idx);

    let st = if opts.standardize {
        Standardization::fit(&train)
    } else {
        Standardization::identity(&train)
    };
    let (sol, edges) = fit_method(&st.apply(&train)?, graph, hp, cfg, opts.method)?;
    let model = st.to_model(&sol.w, *hp)?;

    let task = &test.tasks()[target];
    let pred: Vec<f64> = model.predict_rows(&task.name, &task.x)?.iter().copied().collect();
    let truth: Vec<f64> = task.y.iter().copied().collect();
    Ok(FoldOutcome {
        report: FoldReport {
            fold_index: f,
            n_test: test_idx.len(),
            accuracy: within_threshold_accuracy(&pred, &truth, 1.0)?,
            mean_abs_diff: mean_abs_diff(&pred, &truth)?,
            curve: accuracy_curve(&pred, &truth, &opts.thresholds)?,
            edges,
            converged: sol.converged,
            iterations: sol.iterations,
        },
        pred,
        truth,
    })
}

/// k-fold cross-validation of the chosen model, scoring `target_task` on
/// each held-out fold.
#[allow(clippy::too_many_arguments)]
pub fn run_cv(
    ds: &MultiTaskDataset,
    graph: &GraphMode,
    hp: &Hyperparams,
    cfg: &SolverConfig,
    target_task: &str,
    k: usize,
    seed: u64,
    opts: &CvOptions,
) -> Result<EvalReport> {
    let target = ds.task_index(target_task)?;
    hp.validate()?;
    cfg.validate()?;
    if k < 2 {
        return Err(Error::Argument(format!("cross-validation needs k >= 2, got {k}")));
    }
    if let GraphMode::Fixed(g) = graph {
        if g.n_tasks() != ds.n_tasks() {
            return Err(Error::Dimension(format!(
                "graph has {} nodes, dataset has {} tasks",
                g.n_tasks(),
                ds.n_tasks()
            )));
        }
    }
    let folds = kfold_split(ds.n_samples(), k, seed)?;

    let outcomes: Vec<FoldOutcome> = if opts.parallel {
        (0..k)
            .into_par_iter()
            .map(|f| run_fold(ds, &folds, f, graph, hp, cfg, target, opts))
            .collect::<Result<_>>()?
    } else {
        (0..k)
            .map(|f| run_fold(ds, &folds, f, graph, hp, cfg, target, opts))
            .collect::<Result<_>>()?
    };

    let kf = k as f64;
    let aggregate_accuracy = outcomes.iter().map(|o| o.report.accuracy).sum::<f64>() / kf;
    let aggregate_mean_abs_diff = outcomes.iter().map(|o| o.report.mean_abs_diff).sum::<f64>() / kf;
    let curve = opts
        .thresholds
        .iter()
        .enumerate()
        .map(|(i, &threshold)| CurvePoint {
            threshold,
            accuracy: outcomes.iter().map(|o| o.report.curve[i].accuracy).sum::<f64>() / kf,
        })
        .collect();
    let pred: Vec<f64> = outcomes.iter().flat_map(|o| o.pred.iter().copied()).collect();
    let truth: Vec<f64> = outcomes.iter().flat_map(|o| o.truth.iter().copied()).collect();

    Ok(EvalReport {
        target_task: target_task.to_string(),
        method: opts.method,
        k,
        seed,
        pooled_accuracy: within_threshold_accuracy(&pred, &truth, 1.0)?,
        pooled_mean_abs_diff: mean_abs_diff(&pred, &truth)?,
        per_fold: outcomes.into_iter().map(|o| o.report).collect(),
        aggregate_accuracy,
        aggregate_mean_abs_diff,
        curve,
    })
}
