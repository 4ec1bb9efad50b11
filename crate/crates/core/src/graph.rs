//! Task graphs: edge-incidence (structure) matrix, Laplacian, and the
//! pairwise coupling penalty on the coefficient matrix.

use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::MultiTaskDataset;
use crate::error::{Error, Result};
use crate::models::lasso_fit;
use crate::solver::SolverConfig;

/// Undirected task graph over `M` tasks.
///
/// `S` is `M x |E|` with `+1` at row `a` and `-1` at row `b` for edge `(a, b)`,
/// and `L = S S^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGraph {
    m: usize,
    edges: Vec<(usize, usize)>,
    s: DMatrix<f64>,
    l: DMatrix<f64>,
}

impl TaskGraph {
    pub fn n_tasks(&self) -> usize {
        self.m
    }

    /// Edges as `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn structure(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn empty(m: usize) -> Result<Self> {
        structure_matrix(m, &[])
    }

    pub fn complete(m: usize) -> Result<Self> {
        let edges: Vec<_> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
        structure_matrix(m, &edges)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            m: self.m,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, GraphParseError> {
        let file: GraphFile = serde_json::from_str(text).map_err(GraphParseError::Json)?;
        let edges: Vec<_> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        structure_matrix(file.m, &edges).map_err(GraphParseError::Graph)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            GraphParseError::Json(source) => Error::json(path, source),
            GraphParseError::Graph(e) => e,
        })
    }
}

#[derive(Debug)]
pub enum GraphParseError {
    Json(serde_json::Error),
    Graph(Error),
}

/// On-disk form: `{"M": 3, "edges": [[0, 1], [1, 2]]}`.
#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    #[serde(rename = "M")]
    m: usize,
    edges: Vec<[usize; 2]>,
}

pub fn structure_matrix(m: usize, edges: &[(usize, usize)]) -> Result<TaskGraph> {
    if m == 0 {
        return Err(Error::Graph("a task graph needs at least one node".into()));
    }
    let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a >= m || b >= m {
            return Err(Error::Graph(format!("edge ({a}, {b}) out of range for {m} tasks")));
        }
        if a == b {
            return Err(Error::Graph(format!("self-loop on task {a}")));
        }
        let e = (a.min(b), a.max(b));
        if normalized.contains(&e) {
            return Err(Error::Graph(format!("duplicate edge ({}, {})", e.0, e.1)));
        }
        normalized.push(e);
    }
    let mut s = DMatrix::zeros(m, normalized.len());
    for (k, &(a, b)) in normalized.iter().enumerate() {
        s[(a, k)] = 1.0;
        s[(b, k)] = -1.0;
    }
    let l = &s * s.transpose();
    Ok(TaskGraph {
        m,
        edges: normalized,
        s,
        l,
    })
}

fn check_columns(w: &DMatrix<f64>, g: &TaskGraph) -> Result<()> {
    if w.ncols() != g.m {
        return Err(Error::Dimension(format!(
            "coefficient matrix has {} columns, graph has {} tasks",
            w.ncols(),
            g.m
        )));
    }
    Ok(())
}

/// `sum over edges (a, b) of ||W_a - W_b||^2`, with `W` stored d x M.
pub fn graph_penalty(w: &DMatrix<f64>, g: &TaskGraph) -> Result<f64> {
    check_columns(w, g)?;
    Ok(g.edges
        .iter()
        .map(|&(a, b)| (w.column(a) - w.column(b)).norm_squared())
        .sum())
}

/// `||W S||_F^2`.
pub fn penalty_frobenius(w: &DMatrix<f64>, g: &TaskGraph) -> Result<f64> {
    check_columns(w, g)?;
    Ok((w * &g.s).norm_squared())
}

/// `tr(W L W^T)`.
pub fn penalty_laplacian(w: &DMatrix<f64>, g: &TaskGraph) -> Result<f64> {
    check_columns(w, g)?;
    Ok((w * &g.l).component_mul(w).sum())
}

/// Graph estimated from per-task lasso coefficients.
#[derive(Debug, Clone)]
pub struct StructureEstimate {
    pub graph: TaskGraph,
    /// Pearson correlations between normalized coefficient vectors; zero
    /// wherever a degenerate task is involved.
    pub correlation: DMatrix<f64>,
    /// Tasks whose coefficient vector was zero (or constant) and so took no
    /// part in any edge.
    pub degenerate: Vec<usize>,
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Fits a lasso per task, normalizes each coefficient vector to unit length
/// and links tasks `a < b` whenever `|corr(a, b)| >= corr_threshold`.
pub fn estimate_structure(
    ds: &MultiTaskDataset,
    lambda: f64,
    corr_threshold: f64,
    cfg: &SolverConfig,
) -> Result<StructureEstimate> {
    ds.common_dim()?;
    if !(lambda > 0.0) {
        return Err(Error::Argument(format!("structure lasso needs lambda > 0, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&corr_threshold) {
        return Err(Error::Argument(format!("correlation threshold {corr_threshold} outside [0, 1]")));
    }
    let m = ds.n_tasks();
    let coefs = ds
        .tasks()
        .par_iter()
        .map(|t| lasso_fit(&t.x, &t.y, lambda, cfg))
        .collect::<Result<Vec<_>>>()?;
    let normalized: Vec<Vec<f64>> = coefs
        .iter()
        .map(|w| {
            let norm = w.norm();
            if norm > 0.0 {
                w.iter().map(|v| v / norm).collect()
            } else {
                w.iter().copied().collect()
            }
        })
        .collect();
    let degenerate: Vec<usize> = (0..m).filter(|&t| is_constant(&normalized[t])).collect();
    if !degenerate.is_empty() {
        log::warn!("tasks {degenerate:?} have degenerate lasso coefficients and get no edges");
    }

    let mut correlation = DMatrix::zeros(m, m);
    let mut edges = Vec::new();
    for a in 0..m {
        if degenerate.contains(&a) {
            continue;
        }
        correlation[(a, a)] = 1.0;
        for b in a + 1..m {
            if degenerate.contains(&b) {
                continue;
            }
            let c = pearson(&normalized[a], &normalized[b]);
            correlation[(a, b)] = c;
            correlation[(b, a)] = c;
            if c.abs() >= corr_threshold {
                edges.push((a, b));
            }
        }
    }
    Ok(StructureEstimate {
        graph: structure_matrix(m, &edges)?,
        correlation,
        degenerate,
    })
}
