use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use graphmtl::{
    filter_indeterminate, load_multitask_dataset, Hyperparams, Method, MultiTaskDataset, SolverConfig,
    Standardization, TaskGraph,
};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn is_on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    /// Graph-coupled sparse model.
    Graph,
    /// Trace-norm regularized model.
    Trace,
    /// Independent lasso per task.
    Lasso,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Graph => Method::GraphSparse,
            MethodArg::Trace => Method::TraceNorm,
            MethodArg::Lasso => Method::Lasso,
        }
    }
}

pub fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{what} {}: {e}", path.display())))
}

/// Options shared by `train`, `evaluate` and `curve`. Every option may also
/// be given in the `--config` JSON file under its long flag name; flags on
/// the command line take precedence.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    /// JSON file with default values for any of the options below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Directory holding a `manifest.json` as written by `synth`.
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Per-task features files (comma separated); task names are the file stems.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<PathBuf>>,

    #[arg(long)]
    pub scores: Option<PathBuf>,

    #[arg(long)]
    pub raters: Option<PathBuf>,

    /// Task scored by evaluation [default: first task].
    #[arg(long)]
    pub target: Option<String>,

    /// Drop samples whose target-task score equals this value.
    #[arg(long, allow_negative_numbers = true)]
    pub exclude_score: Option<f64>,

    /// [default: graph]
    #[arg(long)]
    pub method: Option<MethodArg>,

    /// Lasso weight, also used to estimate the task graph [default: 0.01 * lambda_max].
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Trace-norm weight [default: 1].
    #[arg(long)]
    pub rho: Option<f64>,

    /// Graph coupling weight [default: 1].
    #[arg(long)]
    pub rho1: Option<f64>,

    /// l1 weight of the graph model [default: 0.01 * lambda_max].
    #[arg(long)]
    pub rho2: Option<f64>,

    /// Rater-disagreement feature augmentation [default: on when raters are given].
    #[arg(long)]
    pub psi: Option<Toggle>,

    /// `auto` or a graph JSON file [default: auto].
    #[arg(long)]
    pub graph: Option<String>,

    /// Correlation threshold for `--graph auto` [default: 0.9].
    #[arg(long)]
    pub corr_threshold: Option<f64>,

    /// Standardize features and center targets [default: on].
    #[arg(long)]
    pub standardize: Option<Toggle>,

    /// Number of folds [default: 10].
    #[arg(long)]
    pub k: Option<usize>,

    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,

    /// [default: 5000]
    #[arg(long)]
    pub max_iters: Option<usize>,

    /// Relative objective change at which the solver stops [default: 1e-6].
    #[arg(long)]
    pub tol: Option<f64>,

    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! prefer {
    ($a:ident, $b:ident; $($f:ident),*) => {
        RunArgs { config: $a.config, $($f: $a.$f.or($b.$f)),* }
    };
}

impl RunArgs {
    /// Fills unset options from the `--config` file, if any.
    pub fn with_config_file(self) -> Result<RunArgs, Failure> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file: RunArgs = read_json_file(&path, "config")?;
        Ok(prefer!(self, file; data, features, scores, raters, target, exclude_score, method, lambda,
            rho, rho1, rho2, psi, graph, corr_threshold, standardize, k, seed, max_iters, tol, out))
    }
}

#[derive(Debug, Deserialize)]
struct DataManifest {
    features: Vec<PathBuf>,
    scores: PathBuf,
    #[serde(default)]
    raters: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum GraphChoice {
    Auto { corr_threshold: f64 },
    Fixed(TaskGraph),
}

/// The fully resolved settings actually used for a run.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub features: Vec<PathBuf>,
    pub scores: PathBuf,
    pub raters: Option<PathBuf>,
    pub target: String,
    pub exclude_score: Option<f64>,
    pub removed_samples: Vec<String>,
    pub method: Method,
    pub hyperparams: Hyperparams,
    pub graph: String,
    pub corr_threshold: Option<f64>,
    pub standardize: bool,
    pub k: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

pub struct Run {
    pub dataset: MultiTaskDataset,
    pub graph: GraphChoice,
    pub settings: Settings,
    pub out: Option<PathBuf>,
}

fn positive_or_zero(name: &str, v: f64) -> Result<f64, Failure> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::usage(format!("--{name} must be a finite value >= 0, got {v}")))
    }
}

impl RunArgs {
    /// Loads the data and resolves defaults. Nothing is written.
    pub fn resolve(self) -> Result<Run, Failure> {
        let a = self.with_config_file()?;

        let manifest = match &a.data {
            Some(dir) => Some((dir.clone(), read_json_file::<DataManifest>(&dir.join("manifest.json"), "data manifest")?)),
            None => None,
        };
        let from_manifest = |p: &PathBuf| manifest.as_ref().map(|(dir, _)| dir.join(p)).unwrap();
        let features = match (a.features, &manifest) {
            (Some(f), _) => f,
            (None, Some((_, m))) => m.features.iter().map(from_manifest).collect(),
            (None, None) => return Err(Failure::usage("no input: give --data or --features and --scores")),
        };
        let scores = match (a.scores, &manifest) {
            (Some(s), _) => s,
            (None, Some((_, m))) => from_manifest(&m.scores),
            (None, None) => return Err(Failure::usage("--scores is required with --features")),
        };
        let raters = match (a.raters, &manifest) {
            (Some(r), _) => Some(r),
            (None, Some((_, m))) => m.raters.as_ref().map(from_manifest),
            (None, None) => None,
        };

        let mut dataset = load_multitask_dataset(&features, &scores, raters.as_deref())?;
        let target = match a.target {
            Some(t) => t,
            None => dataset.task_names()[0].clone(),
        };
        dataset.task_index(&target)?;

        let mut removed_samples = Vec::new();
        if let Some(score) = a.exclude_score {
            let filtered = filter_indeterminate(&dataset, &target, score)?;
            if filtered.emptied {
                return Err(Failure::usage(format!(
                    "--exclude-score {score} removes every sample of task `{target}`"
                )));
            }
            removed_samples = filtered.removed;
            dataset = filtered.dataset;
        }

        let psi = match a.psi {
            Some(t) => t.is_on(),
            None => dataset.has_raters(),
        };
        if psi && !dataset.has_raters() {
            return Err(Failure::usage(
                "--psi on needs a raters file covering every task (--raters)",
            ));
        }

        let standardize = a.standardize.map(Toggle::is_on).unwrap_or(true);
        let fitted_on = if standardize {
            Standardization::fit(&dataset).apply(&dataset)?
        } else {
            dataset.clone()
        };
        let defaults = Hyperparams::defaults_for(&fitted_on);
        let hyperparams = Hyperparams {
            lambda: positive_or_zero("lambda", a.lambda.unwrap_or(defaults.lambda))?,
            rho: positive_or_zero("rho", a.rho.unwrap_or(defaults.rho))?,
            rho1: positive_or_zero("rho1", a.rho1.unwrap_or(defaults.rho1))?,
            rho2: positive_or_zero("rho2", a.rho2.unwrap_or(defaults.rho2))?,
            psi_enabled: psi,
        };

        let method: Method = a.method.unwrap_or(MethodArg::Graph).into();
        let graph_arg = a.graph.unwrap_or_else(|| "auto".into());
        let (graph, corr_threshold) = if graph_arg == "auto" {
            let c = a.corr_threshold.unwrap_or(0.9);
            if !(0.0..=1.0).contains(&c) {
                return Err(Failure::usage(format!("--corr-threshold must lie in [0, 1], got {c}")));
            }
            if method == Method::GraphSparse && !(hyperparams.lambda > 0.0) {
                return Err(Failure::usage("--graph auto needs --lambda > 0"));
            }
            (GraphChoice::Auto { corr_threshold: c }, Some(c))
        } else {
            let path = PathBuf::from(&graph_arg);
            let graph = TaskGraph::read(&path)?;
            if graph.n_tasks() != dataset.n_tasks() {
                return Err(Failure::usage(format!(
                    "graph {} has {} nodes, data has {} tasks",
                    path.display(),
                    graph.n_tasks(),
                    dataset.n_tasks()
                )));
            }
            (GraphChoice::Fixed(graph), None)
        };

        let solver = SolverConfig {
            max_iters: a.max_iters.unwrap_or(SolverConfig::default().max_iters),
            tol: a.tol.unwrap_or(SolverConfig::default().tol),
            ..SolverConfig::default()
        };
        solver.validate()?;

        let k = a.k.unwrap_or(10);
        let settings = Settings {
            features,
            scores,
            raters,
            target,
            exclude_score: a.exclude_score,
            removed_samples,
            method,
            hyperparams,
            graph: graph_arg,
            corr_threshold,
            standardize,
            k,
            seed: a.seed.unwrap_or(0),
            solver,
        };
        Ok(Run {
            dataset,
            graph,
            settings,
            out: a.out,
        })
    }
}
