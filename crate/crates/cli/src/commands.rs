use std::path::{Path, PathBuf};

use clap::Args;
use graphmtl::evaluation::default_thresholds;
use graphmtl::{
    compute_psi, fit_method, generate_synthetic, load_features, run_cv, structure_matrix,
    write_multitask_dataset, CvOptions, GraphMode, Hyperparams, Model, Standardization, SyntheticSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{read_json_file, GraphChoice, Run, RunArgs};
use crate::Failure;

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_manifest(dir: &Path, command: &str, settings: serde_json::Value, outputs: &[&str]) -> Result<(), Failure> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "settings": settings,
        "outputs": outputs,
    });
    write_file(
        &dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serialization"),
    )
}

fn require_out(out: Option<PathBuf>) -> Result<PathBuf, Failure> {
    out.ok_or_else(|| Failure::usage("--out <dir> is required"))
}

/// `"0-1,2-3"` to `[(0, 1), (2, 3)]`.
pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|e| {
            let parsed = e
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            parsed.ok_or_else(|| Failure::usage(format!("bad edge `{e}`, expected `a-b`")))
        })
        .collect()
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SynthArgs {
    /// JSON file with default values for any of the options below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Samples per task.
    #[arg(long)]
    pub n: Option<usize>,

    /// Features per task.
    #[arg(long)]
    pub d: Option<usize>,

    /// Number of tasks.
    #[arg(long)]
    pub m: Option<usize>,

    /// Fraction of nonzero coefficient rows [default: 0.25].
    #[arg(long)]
    pub sparsity: Option<f64>,

    /// Tasks sharing coefficients, e.g. `0-1,2-3`.
    #[arg(long)]
    pub edges: Option<String>,

    /// Standard deviation of the target noise [default: 0].
    #[arg(long)]
    pub noise: Option<f64>,

    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn synth(args: SynthArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => read_json_file::<SynthArgs>(path, "config")?,
        None => SynthArgs::default(),
    };
    let missing = |name: &str| Failure::usage(format!("--{name} is required"));
    let edges = parse_edges(args.edges.as_deref().or(file.edges.as_deref()).unwrap_or(""))?;
    let spec = SyntheticSpec {
        n: args.n.or(file.n).ok_or_else(|| missing("n"))?,
        d: args.d.or(file.d).ok_or_else(|| missing("d"))?,
        m: args.m.or(file.m).ok_or_else(|| missing("m"))?,
        sparsity: args.sparsity.or(file.sparsity).unwrap_or(0.25),
        edges,
        noise_sigma: args.noise.or(file.noise).unwrap_or(0.0),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    let out = require_out(args.out.or(file.out))?;
    spec.validate()?;
    let graph = structure_matrix(spec.m, &spec.edges)?;
    let (ds, truth) = generate_synthetic(&spec)?;

    create_dir(&out)?;
    let written = write_multitask_dataset(&ds, &out)?;
    let truth_model = Model {
        intercepts: vec![0.0; truth.task_names.len()],
        coefficients: truth,
        hyperparams: Hyperparams {
            lambda: 0.0,
            rho: 0.0,
            rho1: 0.0,
            rho2: 0.0,
            psi_enabled: false,
        },
    };
    write_file(&out.join("truth.json"), &truth_model.to_json())?;
    write_file(&out.join("graph.json"), &graph.to_json())?;
    let manifest = json!({
        "command": "synth",
        "version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
        "features": written.features.iter().map(|p| file_name(p)).collect::<Vec<_>>(),
        "scores": file_name(&written.scores),
        "truth": "truth.json",
        "graph": "graph.json",
    });
    write_file(
        &out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serialization"),
    )?;
    println!(
        "wrote {} tasks x {} samples x {} features to {}",
        spec.m,
        spec.n,
        spec.d,
        out.display()
    );
    Ok(())
}

fn graph_mode(choice: &GraphChoice) -> GraphMode {
    match choice {
        GraphChoice::Auto { corr_threshold } => GraphMode::Auto {
            corr_threshold: *corr_threshold,
        },
        GraphChoice::Fixed(graph) => GraphMode::Fixed(graph.clone()),
    }
}

fn settings_json(run: &Run) -> serde_json::Value {
    serde_json::to_value(&run.settings).expect("settings serialization")
}

pub fn train(args: RunArgs) -> Result<(), Failure> {
    let run = args.resolve()?;
    let out = require_out(run.out.clone())?;
    let s = &run.settings;
    let ds = &run.dataset;

    let st = if s.standardize {
        Standardization::fit(ds)
    } else {
        Standardization::identity(ds)
    };
    let (sol, edges) = fit_method(&st.apply(ds)?, &graph_mode(&run.graph), &s.hyperparams, &s.solver, s.method)?;
    let model = st.to_model(&sol.w, s.hyperparams)?;
    let graph = structure_matrix(ds.n_tasks(), &edges)?;
    let psi = if s.hyperparams.psi_enabled && s.method == graphmtl::Method::GraphSparse {
        Some(ds.tasks().iter().map(compute_psi).collect::<graphmtl::Result<Vec<_>>>()?)
    } else {
        None
    };

    create_dir(&out)?;
    write_file(&out.join("model.json"), &model.to_json())?;
    let mut trace = String::from("iteration,objective\n");
    for (i, v) in sol.objective_trace.iter().enumerate() {
        trace.push_str(&format!("{},{}\n", i + 1, v));
    }
    write_file(&out.join("trace.csv"), &trace)?;
    write_file(&out.join("graph.json"), &graph.to_json())?;
    let mut outputs = vec!["model.json", "trace.csv", "graph.json"];
    if let Some(psi) = &psi {
        let mut text = String::from("id");
        for name in ds.task_names() {
            text.push_str(&format!(",{name}_psi"));
        }
        text.push('\n');
        for (j, id) in ds.sample_ids().iter().enumerate() {
            text.push_str(id);
            for p in psi {
                text.push_str(&format!(",{}", p.values[j]));
            }
            text.push('\n');
        }
        write_file(&out.join("psi.csv"), &text)?;
        outputs.push("psi.csv");
    }
    let mut settings = settings_json(&run);
    settings["edges"] = json!(edges);
    settings["iterations"] = json!(sol.iterations);
    settings["converged"] = json!(sol.converged);
    settings["final_rel_change"] = json!(sol.final_rel_change);
    write_manifest(&out, "train", settings, &outputs)?;

    if !sol.converged {
        return Err(Failure::not_converged(format!(
            "solver stopped after {} iterations without converging; final relative objective change {:e} (tol {:e})",
            sol.iterations, sol.final_rel_change, s.solver.tol
        )));
    }
    println!(
        "converged in {} iterations, objective {}, {} nonzero coefficients, {} graph edges",
        sol.iterations,
        sol.objective(),
        model.coefficients.nonzeros(),
        edges.len()
    );
    Ok(())
}

pub fn evaluate(args: RunArgs, curve_only: bool) -> Result<(), Failure> {
    let run = args.resolve()?;
    let out = require_out(run.out.clone())?;
    let s = &run.settings;
    let opts = CvOptions {
        method: s.method,
        standardize: s.standardize,
        thresholds: default_thresholds(),
        parallel: true,
    };
    let report = run_cv(
        &run.dataset,
        &graph_mode(&run.graph),
        &s.hyperparams,
        &s.solver,
        &s.target,
        s.k,
        s.seed,
        &opts,
    )?;

    create_dir(&out)?;
    write_file(&out.join("curve.csv"), &report.curve_csv())?;
    if !curve_only {
        write_file(&out.join("report.json"), &report.to_json())?;
        write_manifest(&out, "evaluate", settings_json(&run), &["report.json", "curve.csv"])?;
    }

    if !report.all_converged() {
        let bad: Vec<String> = report
            .per_fold
            .iter()
            .filter(|f| !f.converged)
            .map(|f| f.fold_index.to_string())
            .collect();
        return Err(Failure::not_converged(format!(
            "solver did not converge in fold(s) {} within {} iterations",
            bad.join(", "),
            s.solver.max_iters
        )));
    }
    println!(
        "{}: {}-fold accuracy {:.6}, mean abs diff {:.6} (pooled {:.6}, {:.6})",
        s.target,
        s.k,
        report.aggregate_accuracy,
        report.aggregate_mean_abs_diff,
        report.pooled_accuracy,
        report.pooled_mean_abs_diff
    );
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// model.json written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    /// Features file `id,f0,...`.
    #[arg(long)]
    pub features: PathBuf,

    /// Task to score [default: the features file stem].
    #[arg(long)]
    pub target: Option<String>,

    /// Output directory for predictions.csv [default: print to stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn predict(args: PredictArgs) -> Result<(), Failure> {
    let model = Model::read(&args.model)?;
    let target = match args.target {
        Some(t) => t,
        None => args
            .features
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| Failure::usage("cannot derive a task name; pass --target"))?,
    };
    model.coefficients.task_index(&target)?;
    let (ids, x) = load_features(&args.features)?;
    let scores = model.predict_rows(&target, &x)?;

    let mut text = String::from("id,score\n");
    for (id, s) in ids.iter().zip(scores.iter()) {
        text.push_str(&format!("{id},{s}\n"));
    }
    match args.out {
        Some(dir) => {
            create_dir(&dir)?;
            write_file(&dir.join("predictions.csv"), &text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
