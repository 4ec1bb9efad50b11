use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{MultiTaskDataset, TaskDataset};
use crate::error::{Error, Result};
use crate::models::CoefficientMatrix;

/// Parameters of a synthetic multi-task regression problem with known `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Fraction of feature rows of `W` that are nonzero.
    pub sparsity: f64,
    /// Tasks joined by an edge get identical ground-truth columns.
    pub edges: Vec<(usize, usize)>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.m == 0 {
            return Err(Error::Argument("n, d and m must be at least 1".into()));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::Argument(format!("sparsity {} outside (0, 1]", self.sparsity)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Argument(format!("noise_sigma {} must be >= 0", self.noise_sigma)));
        }
        if let Some(&(a, b)) = self.edges.iter().find(|&&(a, b)| a >= self.m || b >= self.m) {
            return Err(Error::Argument(format!("edge ({a}, {b}) out of range for {} tasks", self.m)));
        }
        Ok(())
    }

    /// Number of nonzero rows in the ground truth.
    pub fn support_size(&self) -> usize {
        ((self.sparsity * self.d as f64).ceil() as usize).clamp(1, self.d)
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Draws `X` i.i.d. standard normal per task, a row-sparse ground truth `W`
/// whose columns coincide across connected tasks, and
/// `Y = X W + N(0, noise_sigma^2)`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(MultiTaskDataset, CoefficientMatrix)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut parent: Vec<usize> = (0..spec.m).collect();
    for &(a, b) in &spec.edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }

    let mut support = index::sample(&mut rng, spec.d, spec.support_size()).into_vec();
    support.sort_unstable();

    let mut w = DMatrix::zeros(spec.d, spec.m);
    for t in 0..spec.m {
        let root = find(&mut parent, t);
        if root == t {
            for &r in &support {
                w[(r, t)] = StandardNormal.sample(&mut rng);
            }
        } else {
            let col = w.column(root).clone_owned();
            w.set_column(t, &col);
        }
    }

    let ids: Vec<String> = (0..spec.n).map(|j| format!("s{j:05}")).collect();
    let names: Vec<String> = (0..spec.m).map(|t| format!("task{t}")).collect();
    let mut tasks = Vec::with_capacity(spec.m);
    for (t, name) in names.iter().enumerate() {
        let x = DMatrix::from_fn(spec.n, spec.d, |_, _| StandardNormal.sample(&mut rng));
        let clean = &x * w.column(t);
        let y = DVector::from_fn(spec.n, |j, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            if spec.noise_sigma == 0.0 {
                clean[j]
            } else {
                clean[j] + spec.noise_sigma * z
            }
        });
        tasks.push(TaskDataset::new(t, name.clone(), x, y, None, ids.clone())?);
    }
    Ok((
        MultiTaskDataset::new(tasks)?,
        CoefficientMatrix::new(w, names)?,
    ))
}
