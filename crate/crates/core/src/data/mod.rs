//! Task datasets, CSV ingestion and synthetic problem generation.

mod csv;
mod synthetic;

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use self::csv::{load_features, load_multitask_dataset, write_multitask_dataset, WrittenFiles};
pub use self::synthetic::{generate_synthetic, SyntheticSpec};

/// One regression task: a feature matrix and one score per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task_id: usize,
    pub name: String,
    /// n x d feature matrix, one row per sample.
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Individual rater scores per sample, when available.
    pub raters: Option<Vec<Vec<f64>>>,
    pub sample_ids: Vec<String>,
}

impl TaskDataset {
    pub fn new(
        task_id: usize,
        name: impl Into<String>,
        x: DMatrix<f64>,
        y: DVector<f64>,
        raters: Option<Vec<Vec<f64>>>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let task = TaskDataset {
            task_id,
            name: name.into(),
            x,
            y,
            raters,
            sample_ids,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    fn validate(&self) -> Result<()> {
        let n = self.x.nrows();
        if self.y.len() != n || self.sample_ids.len() != n {
            return Err(Error::Dimension(format!(
                "task `{}`: {} feature rows, {} scores, {} sample ids",
                self.name,
                n,
                self.y.len(),
                self.sample_ids.len()
            )));
        }
        let mut seen = HashSet::with_capacity(n);
        for id in &self.sample_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Schema(format!(
                    "task `{}`: duplicate sample id `{id}`",
                    self.name
                )));
            }
        }
        if let Some(raters) = &self.raters {
            if raters.len() != n {
                return Err(Error::Dimension(format!(
                    "task `{}`: {} rater lists for {} samples",
                    self.name,
                    raters.len(),
                    n
                )));
            }
            if let Some(j) = raters.iter().position(|r| r.is_empty()) {
                return Err(Error::Schema(format!(
                    "task `{}`: sample `{}` has an empty rater list",
                    self.name, self.sample_ids[j]
                )));
            }
        }
        Ok(())
    }

    /// Rows `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> TaskDataset {
        let x = self.x.select_rows(indices);
        let y = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.y[i]));
        TaskDataset {
            task_id: self.task_id,
            name: self.name.clone(),
            x,
            y,
            raters: self
                .raters
                .as_ref()
                .map(|r| indices.iter().map(|&i| r[i].clone()).collect()),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }
}

/// M tasks observed on the same samples, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskDataset {
    tasks: Vec<TaskDataset>,
}

impl MultiTaskDataset {
    /// Task ids are reassigned to the position in `tasks`.
    pub fn new(mut tasks: Vec<TaskDataset>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::Argument("a dataset needs at least one task".into()));
        }
        for (i, t) in tasks.iter_mut().enumerate() {
            t.task_id = i;
            t.validate()?;
        }
        let reference = &tasks[0].sample_ids;
        for t in &tasks[1..] {
            if &t.sample_ids != reference {
                let a: HashSet<&String> = reference.iter().collect();
                let b: HashSet<&String> = t.sample_ids.iter().collect();
                let mut ids: Vec<String> =
                    a.symmetric_difference(&b).map(|s| s.to_string()).collect();
                ids.sort();
                if ids.is_empty() {
                    ids.push("(same ids, different order)".into());
                }
                return Err(Error::Alignment {
                    context: format!("task `{}` vs task `{}`", tasks[0].name, t.name),
                    ids,
                });
            }
        }
        let mut names = HashSet::new();
        for t in &tasks {
            if !names.insert(t.name.as_str()) {
                return Err(Error::Schema(format!("duplicate task name `{}`", t.name)));
            }
        }
        Ok(MultiTaskDataset { tasks })
    }

    pub fn tasks(&self) -> &[TaskDataset] {
        &self.tasks
    }

    pub fn into_tasks(self) -> Vec<TaskDataset> {
        self.tasks
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_samples(&self) -> usize {
        self.tasks[0].n_samples()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.tasks[0].sample_ids
    }

    pub fn task_names(&self) -> Vec<String> {
        self.tasks.iter().map(|t| t.name.clone()).collect()
    }

    pub fn task_index(&self, name: &str) -> Result<usize> {
        self.tasks
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::Lookup {
                kind: "task",
                name: name.to_string(),
            })
    }

    /// The shared feature dimension, or an error when tasks differ.
    pub fn common_dim(&self) -> Result<usize> {
        let d = self.tasks[0].n_features();
        match self.tasks.iter().find(|t| t.n_features() != d) {
            None => Ok(d),
            Some(t) => Err(Error::Dimension(format!(
                "tasks `{}` (d={}) and `{}` (d={}) differ in feature dimension",
                self.tasks[0].name,
                d,
                t.name,
                t.n_features()
            ))),
        }
    }

    pub fn has_raters(&self) -> bool {
        self.tasks.iter().all(|t| t.raters.is_some())
    }

    /// Same samples removed from (or kept in) every task.
    pub fn subset(&self, indices: &[usize]) -> MultiTaskDataset {
        MultiTaskDataset {
            tasks: self.tasks.iter().map(|t| t.subset(indices)).collect(),
        }
    }
}

/// Result of [`filter_indeterminate`].
#[derive(Debug, Clone)]
pub struct Filtered {
    pub dataset: MultiTaskDataset,
    pub removed: Vec<String>,
    /// Set when every sample was removed.
    pub emptied: bool,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Drops every sample whose score on `task_name` equals `excluded_score`
/// (compared after rounding to six decimals). The same samples are removed
/// from all tasks.
pub fn filter_indeterminate(
    ds: &MultiTaskDataset,
    task_name: &str,
    excluded_score: f64,
) -> Result<Filtered> {
    let task = &ds.tasks()[ds.task_index(task_name)?];
    let target = round6(excluded_score);
    let (keep, drop): (Vec<usize>, Vec<usize>) =
        (0..ds.n_samples()).partition(|&j| round6(task.y[j]) != target);
    let removed: Vec<String> = drop.iter().map(|&j| ds.sample_ids()[j].clone()).collect();
    let emptied = keep.is_empty() && ds.n_samples() > 0;
    if emptied {
        log::warn!("filtering `{task_name}` == {excluded_score} removed every sample");
    }
    Ok(Filtered {
        dataset: ds.subset(&keep),
        removed,
        emptied,
    })
}
