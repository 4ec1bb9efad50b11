//! Acceptance gate. Each check prints one PASS/FAIL line; the process exits
//! non-zero if any check fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use graphmtl::evaluation::default_thresholds;
use graphmtl::graph::{penalty_frobenius, penalty_laplacian};
use graphmtl::models::GraphSparseObjective;
use graphmtl::{
    accuracy_curve, fit_method, generate_synthetic, graph_penalty, graph_sparse_mtl_fit, inconsistency_score,
    lasso_solve, mean_abs_diff, run_cv, singular_value_threshold, soft_threshold,
    structure_matrix, trace_mtl_solve, within_threshold_accuracy, CvOptions, GraphMode, Hyperparams, Method,
    MultiTaskDataset, SolverConfig, SyntheticSpec, TaskDataset, TaskGraph,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;
type NamedCheck = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn tight() -> SolverConfig {
    SolverConfig {
        tol: 1e-15,
        max_iters: 1_000_000,
        ..SolverConfig::default()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn hp(lambda: f64, rho: f64, rho1: f64, rho2: f64) -> Hyperparams {
    Hyperparams {
        lambda,
        rho,
        rho1,
        rho2,
        psi_enabled: false,
    }
}

fn synthetic(n: usize, d: usize, m: usize, edges: &[(usize, usize)], sparsity: f64, noise: f64, seed: u64) -> MultiTaskDataset {
    generate_synthetic(&SyntheticSpec {
        n,
        d,
        m,
        sparsity,
        edges: edges.to_vec(),
        noise_sigma: noise,
        seed,
    })
    .expect("synthetic data")
    .0
}

fn scalar_soft(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn prox_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut soft_err, mut svt_err) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let (r, c) = (rng.random_range(1..7), rng.random_range(1..7));
        let v = gaussian(&mut rng, r, c) * rng.random_range(0.1..5.0);
        let tau = rng.random_range(0.0..3.0);

        let got = soft_threshold(&v, tau);
        for (g, x) in got.iter().zip(v.iter()) {
            soft_err = soft_err.max((g - scalar_soft(*x, tau)).abs());
        }

        let out = singular_value_threshold(&v, tau).map_err(|e| e.to_string())?;
        ensure(out.shape() == v.shape(), || "SVT changed the shape".into())?;
        let expect: Vec<f64> = sorted_singular_values(&v).iter().map(|s| (s - tau).max(0.0)).collect();
        for (g, e) in sorted_singular_values(&out).iter().zip(&expect) {
            svt_err = svt_err.max((g - e).abs());
        }
    }
    ensure(soft_err <= 1e-10, || format!("soft threshold error {soft_err:e}"))?;
    ensure(svt_err <= 1e-9, || format!("singular value error {svt_err:e}"))?;
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("max errors soft {soft_err:.1e}, svt {svt_err:.1e}"))
}

/// Cyclic coordinate descent for `||Xw - y||^2 + lambda ||w||_1`, run until
/// no coordinate moves by more than 1e-12.
fn coordinate_descent(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let (n, d) = x.shape();
    let cols: &[f64] = x.as_slice();
    let col_sq: Vec<f64> = (0..d).map(|j| cols[j * n..(j + 1) * n].iter().map(|v| v * v).sum()).collect();
    let mut w = vec![0.0; d];
    let mut r: Vec<f64> = y.iter().copied().collect();
    loop {
        let mut biggest = 0.0_f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let xj = &cols[j * n..(j + 1) * n];
            let rho = xj.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() + col_sq[j] * w[j];
            let new = scalar_soft(rho, lambda / 2.0) / col_sq[j];
            let delta = new - w[j];
            if delta != 0.0 {
                for (ri, xi) in r.iter_mut().zip(xj) {
                    *ri -= delta * xi;
                }
                w[j] = new;
            }
            biggest = biggest.max(delta.abs());
        }
        if biggest < 1e-12 {
            return DVector::from_vec(w);
        }
    }
}

fn lasso_objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    (x * w - y).norm_squared() + lambda * w.abs().sum()
}

fn kkt_residual(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    let g = x.transpose() * (x * w - y) * 2.0;
    g.iter()
        .zip(w.iter())
        .map(|(gj, wj)| {
            if *wj != 0.0 {
                (gj + lambda * wj.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn lasso_oracle() -> Check {
    let start = Instant::now();
    let (mut worst_rel, mut worst_kkt) = (0.0_f64, 0.0_f64);
    for inst in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + inst);
        let x = gaussian(&mut rng, 20, 50);
        let mut truth = DVector::zeros(50);
        for j in 0..5 {
            truth[j * 7] = rng.sample::<f64, _>(StandardNormal) * 2.0;
        }
        let y = &x * truth + DVector::from_fn(20, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal));
        for lambda in [0.01, 0.1, 1.0] {
            let res = lasso_solve(&x, &y, lambda, &tight()).map_err(|e| e.to_string())?;
            let w = res.w.column(0).clone_owned();
            let f_apg = lasso_objective(&x, &y, &w, lambda);
            let f_cd = lasso_objective(&x, &y, &coordinate_descent(&x, &y, lambda), lambda);
            let rel = (f_apg - f_cd).abs() / f_cd.abs().max(f64::MIN_POSITIVE);
            worst_rel = worst_rel.max(rel);
            worst_kkt = worst_kkt.max(kkt_residual(&x, &y, &w, lambda));
            ensure(rel <= 1e-6, || format!("instance {inst}, lambda {lambda}: relative gap {rel:e}"))?;
        }
    }
    ensure(worst_kkt <= 1e-6, || format!("KKT residual {worst_kkt:e}"))?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("worst relative gap {worst_rel:.1e}, worst KKT residual {worst_kkt:.1e}"))
}

fn random_with_raters(seed: u64) -> MultiTaskDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..5).map(|j| format!("n{j}")).collect();
    let tasks = (0..3)
        .map(|t| {
            let x = gaussian(&mut rng, 5, 8);
            let raters: Vec<Vec<f64>> = (0..5)
                .map(|_| {
                    let r = rng.random_range(1..=4);
                    (0..r).map(|_| rng.random_range(1..=5) as f64).collect()
                })
                .collect();
            let y = DVector::from_fn(5, |_, _| rng.random_range(1.0..5.0));
            TaskDataset::new(t, format!("t{t}"), x, y, Some(raters), ids.clone()).unwrap()
        })
        .collect();
    MultiTaskDataset::new(tasks).unwrap()
}

/// Smooth part written out directly: squared loss on `X + psi 1^T` plus
/// `rho1` times the pairwise edge differences.
fn smooth_oracle(ds: &MultiTaskDataset, edges: &[(usize, usize)], rho1: f64, w: &DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    for (m, t) in ds.tasks().iter().enumerate() {
        for i in 0..t.n_samples() {
            let r = t.raters.as_ref().unwrap()[i].clone();
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            let ss: f64 = r.iter().map(|v| (v - mean).powi(2)).sum();
            let var = ss / r.len() as f64;
            let psi = if var == 0.0 { 1.0 } else { (ss / (2.0 * var)).exp() };
            let pred: f64 = (0..t.n_features()).map(|j| (t.x[(i, j)] + psi) * w[(j, m)]).sum();
            total += (pred - t.y[i]).powi(2);
        }
    }
    for &(a, b) in edges {
        total += rho1 * (w.column(a) - w.column(b)).norm_squared();
    }
    total
}

fn gradient_check() -> Check {
    let start = Instant::now();
    let edges = [(0, 1), (1, 2)];
    let g = structure_matrix(3, &edges).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for seed in 0..20 {
        let ds = random_with_raters(seed);
        let h = Hyperparams {
            psi_enabled: true,
            ..hp(0.1, 0.0, 0.5 + seed as f64 * 0.1, 0.1)
        };
        let obj = GraphSparseObjective::new(&ds, &g, &h).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let w = gaussian(&mut rng, 8, 3);
        let value = obj.smooth_value(&w);
        let oracle = smooth_oracle(&ds, &edges, h.rho1, &w);
        ensure((value - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), || {
            format!("seed {seed}: smooth value {value} vs direct {oracle}")
        })?;
        let grad = obj.smooth_gradient(&w);
        let step = 1e-5;
        let fd = DMatrix::from_fn(8, 3, |i, j| {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[(i, j)] += step;
            wm[(i, j)] -= step;
            (smooth_oracle(&ds, &edges, h.rho1, &wp) - smooth_oracle(&ds, &edges, h.rho1, &wm)) / (2.0 * step)
        });
        let rel = (&grad - &fd).norm() / fd.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure(rel < 1e-5, || format!("seed {seed}: relative gradient error {rel:e}"))?;
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("worst relative error {worst:.1e} over 20 instances"))
}

fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    x.clone().svd(true, true).solve(y, 1e-14).expect("svd solve")
}

fn reductions() -> Check {
    let mut worst_gap = 0.0_f64;
    for seed in 0..5 {
        let ds = synthetic(30, 10, 1, &[], 0.5, 0.3, 40 + seed);
        let t = &ds.tasks()[0];
        let lambda = 0.5;
        let lasso = lasso_solve(&t.x, &t.y, lambda, &tight()).map_err(|e| e.to_string())?;
        let g = TaskGraph::empty(1).map_err(|e| e.to_string())?;
        let sol = graph_sparse_mtl_fit(&ds, &g, &hp(lambda, 0.0, 1.0, lambda), &tight()).map_err(|e| e.to_string())?;
        let gap = (sol.objective() - lasso.objective()).abs();
        worst_gap = worst_gap.max(gap);
        ensure(gap < 1e-8, || format!("seed {seed}: single-task objective gap {gap:e}"))?;
    }

    let mut worst_ls = 0.0_f64;
    for seed in 0..5 {
        let ds = synthetic(40, 6, 3, &[(0, 1)], 1.0, 0.5, 60 + seed);
        let direct: Vec<DVector<f64>> = ds.tasks().iter().map(|t| least_squares(&t.x, &t.y)).collect();
        let trace = trace_mtl_solve(&ds, 0.0, &tight()).map_err(|e| e.to_string())?;
        let g = structure_matrix(3, &[(0, 1), (1, 2)]).map_err(|e| e.to_string())?;
        let graph = graph_sparse_mtl_fit(&ds, &g, &hp(0.0, 0.0, 0.0, 0.0), &tight()).map_err(|e| e.to_string())?;
        for (m, ls) in direct.iter().enumerate() {
            for (name, w) in [("trace", &trace.w), ("graph", &graph.w)] {
                let err = (w.values.column(m) - ls).amax();
                worst_ls = worst_ls.max(err);
                ensure(err < 1e-6, || format!("seed {seed}: {name} fit task {m} differs from least squares by {err:e}"))?;
            }
        }
    }
    Ok(format!("single-task gap {worst_gap:.1e}, least-squares error {worst_ls:.1e}"))
}

fn penalty_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for pair in 0..100 {
        let m = rng.random_range(2..7);
        let d = rng.random_range(1..6);
        let mut edges = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let g = structure_matrix(m, &edges).map_err(|e| e.to_string())?;
        let w = gaussian(&mut rng, d, m) * 3.0;
        let pairwise: f64 = edges.iter().map(|&(a, b)| (w.column(a) - w.column(b)).norm_squared()).sum();
        let tol = 1e-10 * pairwise.max(1.0);
        for (name, v) in [
            ("frobenius", penalty_frobenius(&w, &g)),
            ("laplacian", penalty_laplacian(&w, &g)),
            ("pairwise", graph_penalty(&w, &g)),
        ] {
            let v = v.map_err(|e| e.to_string())?;
            worst = worst.max((v - pairwise).abs() / pairwise.max(1.0));
            ensure((v - pairwise).abs() <= tol, || format!("pair {pair}: {name} form {v} vs {pairwise}"))?;
        }
        let l = g.laplacian();
        ensure(l.row_iter().all(|r| r.sum() == 0.0), || format!("pair {pair}: nonzero Laplacian row sum"))?;
        let min_eig = SymmetricEigen::new(l.clone()).eigenvalues.min();
        ensure(min_eig >= -1e-10, || format!("pair {pair}: Laplacian eigenvalue {min_eig}"))?;
    }
    Ok(format!("worst relative difference {worst:.1e} over 100 pairs"))
}

fn psi_contract() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let r: Vec<f64> = (0..rng.random_range(1..8)).map(|_| rng.random_range(1..=5) as f64).collect();
        let psi = inconsistency_score(&r).map_err(|e| e.to_string())?;
        ensure(psi >= 1.0, || format!("psi {psi} < 1 for {r:?}"))?;
    }
    for v in [1.0, 3.0, 5.0, 2.5] {
        let psi = inconsistency_score(&[v; 4]).map_err(|e| e.to_string())?;
        ensure(psi == 1.0, || format!("unanimous {v} gives {psi}"))?;
    }
    let psi = inconsistency_score(&[1.0, 5.0, 1.0, 5.0]).map_err(|e| e.to_string())?;
    let e2 = 2.0_f64.exp();
    ensure((psi - e2).abs() <= 1e-9, || format!("[1,5,1,5] gives {psi}, expected {e2}"))?;
    Ok(format!("[1,5,1,5] -> {psi:.12}"))
}

fn held_out_mad(train: &MultiTaskDataset, test: &MultiTaskDataset, method: Method, h: &Hyperparams) -> Result<f64, String> {
    let cfg = SolverConfig::default();
    let mode = GraphMode::Auto { corr_threshold: 0.9 };
    let (sol, _) = fit_method(train, &mode, h, &cfg, method).map_err(|e| e.to_string())?;
    let mut total = 0.0;
    for (m, t) in test.tasks().iter().enumerate() {
        let pred: Vec<f64> = (&t.x * sol.w.values.column(m)).iter().copied().collect();
        let truth: Vec<f64> = t.y.iter().copied().collect();
        total += mean_abs_diff(&pred, &truth).map_err(|e| e.to_string())?;
    }
    Ok(total / test.n_tasks() as f64)
}

/// Coupling weight for the multi-task benefit check, fixed for all seeds.
const MTL_RHO1: f64 = 10.0;

fn mtl_benefit() -> Check {
    let start = Instant::now();
    let (n_train, n_test) = (60, 200);
    let mut wins = 0;
    let mut gaps = Vec::new();
    for seed in 0..20 {
        let ds = synthetic(n_train + n_test, 100, 4, &[(0, 1), (2, 3)], 0.1, 0.5, 9000 + seed);
        let train = ds.subset(&(0..n_train).collect::<Vec<_>>());
        let test = ds.subset(&(n_train..n_train + n_test).collect::<Vec<_>>());
        let lambda = 0.01 * graphmtl::models::lambda_max(&train);
        let h = hp(lambda, 0.0, MTL_RHO1, lambda);
        let graph = held_out_mad(&train, &test, Method::GraphSparse, &h)?;
        let lasso = held_out_mad(&train, &test, Method::Lasso, &h)?;
        if graph < lasso {
            wins += 1;
        }
        gaps.push(lasso - graph);
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    ensure(wins >= 16, || format!("graph model better in only {wins}/20 seeds (mean gap {mean_gap:.4})"))?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!("graph model better in {wins}/20 seeds, mean MAE reduction {mean_gap:.4}"))
}

fn evaluation_protocol() -> Check {
    let pred = [3.4, 1.0, 5.0];
    let truth = [4.0, 2.5, 4.2];
    let acc = within_threshold_accuracy(&pred, &truth, 1.0).map_err(|e| e.to_string())?;
    ensure(acc == 2.0 / 3.0, || format!("fixture accuracy {acc}"))?;
    let mad = mean_abs_diff(&pred, &truth).map_err(|e| e.to_string())?;
    ensure((mad - 0.966667).abs() < 5e-7, || format!("fixture mean abs diff {mad}"))?;
    let curve = accuracy_curve(&pred, &truth, &[0.2, 0.6, 1.0]).map_err(|e| e.to_string())?;
    let accs: Vec<f64> = curve.iter().map(|p| p.accuracy).collect();
    ensure(accs == [0.0, 1.0 / 3.0, 2.0 / 3.0], || format!("fixture curve {accs:?}"))?;

    let mut runs = 0;
    for seed in 0..4 {
        let ds = synthetic(40, 8, 3, &[(0, 1)], 0.5, 0.8, 300 + seed);
        let h = hp(1.0, 1.0, 1.0, 1.0);
        for method in [Method::GraphSparse, Method::TraceNorm, Method::Lasso] {
            let opts = CvOptions {
                method,
                standardize: true,
                ..CvOptions::default()
            };
            let mode = GraphMode::Auto { corr_threshold: 0.9 };
            let cfg = SolverConfig::default();
            let a = run_cv(&ds, &mode, &h, &cfg, "task0", 10, seed, &opts).map_err(|e| e.to_string())?;
            let b = run_cv(&ds, &mode, &h, &cfg, "task0", 10, seed, &opts).map_err(|e| e.to_string())?;
            let serial = CvOptions { parallel: false, ..opts.clone() };
            let c = run_cv(&ds, &mode, &h, &cfg, "task0", 10, seed, &serial).map_err(|e| e.to_string())?;
            ensure(a.to_json() == b.to_json() && a.to_json() == c.to_json(), || {
                format!("seed {seed}, {method:?}: repeated 10-fold runs differ")
            })?;
            let monotone = |c: &[graphmtl::evaluation::CurvePoint]| c.windows(2).all(|p| p[1].accuracy >= p[0].accuracy);
            ensure(monotone(&a.curve) && a.per_fold.iter().all(|f| monotone(&f.curve)), || {
                format!("seed {seed}, {method:?}: curve decreases")
            })?;
            runs += 1;
        }
    }
    Ok(format!("fixture 2/3 and {mad:.6}; {runs} reproducible 10-fold runs with monotone curves"))
}

fn curve_shape() -> Check {
    let ds = synthetic(100, 10, 3, &[(0, 1)], 0.5, 1.0, 77);
    let h = Hyperparams::defaults_for(&ds);
    let opts = CvOptions {
        standardize: true,
        ..CvOptions::default()
    };
    let report = run_cv(
        &ds,
        &GraphMode::Auto { corr_threshold: 0.9 },
        &h,
        &SolverConfig::default(),
        "task0",
        10,
        0,
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let at = |t: f64| {
        report
            .curve
            .iter()
            .find(|p| (p.threshold - t).abs() < 1e-12)
            .map(|p| p.accuracy)
            .ok_or_else(|| format!("threshold {t} missing from {:?}", default_thresholds()))
    };
    let (a06, a1, a2) = (at(0.6)?, at(1.0)?, at(2.0)?);
    ensure(a2 >= a1 && a1 >= a06, || format!("curve(0.6)={a06}, curve(1)={a1}, curve(2)={a2}"))?;
    ensure(a2 > a1 || a1 > a06, || format!("curve flat: {a06} {a1} {a2}"))?;
    Ok(format!("curve(0.6)={a06:.3}, curve(1)={a1:.3}, curve(2)={a2:.3}"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_graphmtl"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!(
            "`graphmtl {}` exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    let (data, model, eval) = (p("data"), p("model"), p("eval"));
    run_cli(&["synth", "--n", "50", "--d", "20", "--m", "3", "--edges", "0-1", "--seed", "7", "--out", &data])?;
    run_cli(&["train", "--data", &data, "--out", &model])?;
    run_cli(&["evaluate", "--data", &data, "--out", &eval])?;
    let text = std::fs::read_to_string(Path::new(&eval).join("report.json")).map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let acc = report["aggregate_accuracy"].as_f64().unwrap_or(f64::NAN);
    let mad = report["aggregate_mean_abs_diff"].as_f64().unwrap_or(f64::NAN);
    ensure(acc == 1.0, || format!("aggregate accuracy {acc}"))?;
    ensure(mad < 0.05, || format!("aggregate mean abs diff {mad}"))?;
    within_time(start, Duration::from_secs(60))?;
    Ok(format!("accuracy {acc}, mean abs diff {mad:.4}, {:.1?}", start.elapsed()))
}

fn main() {
    let checks: [NamedCheck; 10] = [
        ("prox operators", prox_correctness),
        ("lasso vs coordinate descent", lasso_oracle),
        ("gradient check", gradient_check),
        ("reductions", reductions),
        ("penalty identities", penalty_identities),
        ("psi contract", psi_contract),
        ("multi-task benefit", mtl_benefit),
        ("evaluation protocol", evaluation_protocol),
        ("curve shape", curve_shape),
        ("end-to-end cli", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({t:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({t:.2?}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
