//! CSV schemas.
//!
//! * features, one file per task: `id,f0,f1,...,f{d-1}`; the task name is
//!   the file stem.
//! * scores: `id,task,score`, one row per (sample, task).
//! * raters: `id,task,rater,score`, one row per individual rating.
//!
//! Samples are aligned by id. The first features file fixes the sample
//! order.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use super::{MultiTaskDataset, TaskDataset};
use crate::error::{Error, Result};

fn csv_error(path: &Path, e: ::csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        ::csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn reader(path: &Path) -> Result<::csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(file))
}

fn check_header(path: &Path, rdr: &mut ::csv::Reader<std::fs::File>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_error(path, e))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_f64(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("{what}: `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{what}: non-finite value `{field}`"),
        });
    }
    Ok(v)
}

struct FeatureTable {
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    d: usize,
}

fn read_features(path: &Path) -> Result<FeatureTable> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let d = header.len().saturating_sub(1);
    let mut expected = vec!["id".to_string()];
    expected.extend((0..d).map(|k| format!("f{k}")));
    if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "expected header `id,f0,f1,...`".into(),
        });
    }

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let id = rec[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::Schema(format!(
                "{}: line {line}: duplicate sample id `{id}`",
                path.display()
            )));
        }
        let row = rec
            .iter()
            .skip(1)
            .enumerate()
            .map(|(k, f)| parse_f64(path, line, f, &format!("f{k}")))
            .collect::<Result<Vec<f64>>>()?;
        ids.push(id);
        rows.push(row);
    }
    Ok(FeatureTable { ids, rows, d })
}

/// Reads a single `id,f0,...` file, as used at prediction time.
pub fn load_features(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let table = read_features(path)?;
    let x = DMatrix::from_fn(table.rows.len(), table.d, |i, j| table.rows[i][j]);
    Ok((table.ids, x))
}

fn task_name_of(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Argument(format!("cannot derive a task name from {}", path.display())))
}

fn alignment_error(context: String, mut ids: Vec<String>) -> Error {
    ids.sort();
    ids.dedup();
    Error::Alignment { context, ids }
}

/// Loads one features file per task plus the scores file, and optionally a
/// raters file. When raters are given for a task its targets become the
/// per-sample mean rating.
pub fn load_multitask_dataset<P: AsRef<Path>>(
    features_paths: &[P],
    scores_path: &Path,
    raters_path: Option<&Path>,
) -> Result<MultiTaskDataset> {
    if features_paths.is_empty() {
        return Err(Error::Argument("at least one features file is required".into()));
    }
    let names = features_paths
        .iter()
        .map(|p| task_name_of(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let tables = features_paths
        .iter()
        .map(|p| read_features(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    let order: Vec<String> = tables[0].ids.clone();
    let index: HashMap<&str, usize> = order.iter().enumerate().map(|(j, s)| (s.as_str(), j)).collect();
    let n = order.len();

    // Reorder every table into the first file's sample order.
    let mut matrices = Vec::with_capacity(tables.len());
    for (t, (table, path)) in tables.iter().zip(features_paths).enumerate() {
        let theirs: HashSet<&str> = table.ids.iter().map(String::as_str).collect();
        let missing: Vec<String> = order.iter().filter(|id| !theirs.contains(id.as_str())).cloned().collect();
        let extra: Vec<String> = table.ids.iter().filter(|id| !index.contains_key(id.as_str())).cloned().collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(alignment_error(
                format!("{} vs {}", path.as_ref().display(), features_paths[0].as_ref().display()),
                missing.into_iter().chain(extra).collect(),
            ));
        }
        let mut x = DMatrix::zeros(n, table.d);
        for (id, row) in table.ids.iter().zip(&table.rows) {
            let j = index[id.as_str()];
            for (k, v) in row.iter().enumerate() {
                x[(j, k)] = *v;
            }
        }
        debug_assert_eq!(t, matrices.len());
        matrices.push(x);
    }

    let task_index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if task_index.len() != names.len() {
        return Err(Error::Schema("two features files share a task name".into()));
    }

    // scores
    let mut scores: Vec<Vec<Option<f64>>> = vec![vec![None; n]; names.len()];
    let mut rdr = reader(scores_path)?;
    check_header(scores_path, &mut rdr, &["id", "task", "score"])?;
    let mut unknown_ids = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(scores_path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let t = *task_index.get(&rec[1]).ok_or_else(|| {
            Error::Schema(format!(
                "{}: line {line}: unknown task `{}`",
                scores_path.display(),
                &rec[1]
            ))
        })?;
        let score = parse_f64(scores_path, line, &rec[2], "score")?;
        match index.get(&rec[0]) {
            None => unknown_ids.push(rec[0].to_string()),
            Some(&j) => {
                if scores[t][j].replace(score).is_some() {
                    return Err(Error::Schema(format!(
                        "{}: line {line}: duplicate score for sample `{}` task `{}`",
                        scores_path.display(),
                        &rec[0],
                        &rec[1]
                    )));
                }
            }
        }
    }
    if !unknown_ids.is_empty() {
        return Err(alignment_error(
            format!("{} has ids absent from the features files", scores_path.display()),
            unknown_ids,
        ));
    }
    let mut missing = Vec::new();
    for (t, col) in scores.iter().enumerate() {
        for (j, s) in col.iter().enumerate() {
            if s.is_none() {
                missing.push(format!("{}/{}", order[j], names[t]));
            }
        }
    }
    if !missing.is_empty() {
        return Err(alignment_error(
            format!("{} lacks scores (id/task)", scores_path.display()),
            missing,
        ));
    }

    // raters
    let mut raters: Vec<Option<Vec<Vec<f64>>>> = vec![None; names.len()];
    if let Some(rpath) = raters_path {
        let mut rdr = reader(rpath)?;
        check_header(rpath, &mut rdr, &["id", "task", "rater", "score"])?;
        let mut unknown_ids = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(rpath, e))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let t = *task_index.get(&rec[1]).ok_or_else(|| {
                Error::Schema(format!("{}: line {line}: unknown task `{}`", rpath.display(), &rec[1]))
            })?;
            let score = parse_f64(rpath, line, &rec[3], "score")?;
            match index.get(&rec[0]) {
                None => unknown_ids.push(rec[0].to_string()),
                Some(&j) => raters[t].get_or_insert_with(|| vec![Vec::new(); n])[j].push(score),
            }
        }
        if !unknown_ids.is_empty() {
            return Err(alignment_error(
                format!("{} has ids absent from the features files", rpath.display()),
                unknown_ids,
            ));
        }
        let mut missing = Vec::new();
        for (t, r) in raters.iter().enumerate() {
            if let Some(r) = r {
                missing.extend(
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| v.is_empty())
                        .map(|(j, _)| format!("{}/{}", order[j], names[t])),
                );
            }
        }
        if !missing.is_empty() {
            return Err(alignment_error(
                format!("{} lacks ratings (id/task)", rpath.display()),
                missing,
            ));
        }
    }

    let tasks = names
        .into_iter()
        .zip(matrices)
        .zip(scores.into_iter().zip(raters))
        .enumerate()
        .map(|(t, ((name, x), (s, r)))| {
            let y = match &r {
                Some(r) => DVector::from_iterator(n, r.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64)),
                None => DVector::from_iterator(n, s.into_iter().map(|v| v.unwrap_or_default())),
            };
            TaskDataset::new(t, name, x, y, r, order.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    MultiTaskDataset::new(tasks)
}

/// Paths produced by [`write_multitask_dataset`].
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub features: Vec<PathBuf>,
    pub scores: PathBuf,
    pub raters: Option<PathBuf>,
}

fn writer(path: &Path) -> Result<::csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(::csv::Writer::from_writer(file))
}

fn finish(path: &Path, mut w: ::csv::Writer<std::fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `<task>.csv` per task, `scores.csv`, and `raters.csv` when any task
/// carries ratings. Floats use the shortest exact decimal representation.
pub fn write_multitask_dataset(ds: &MultiTaskDataset, dir: &Path) -> Result<WrittenFiles> {
    for t in ds.tasks() {
        if t.name == "scores" || t.name == "raters" {
            return Err(Error::Schema(format!("task name `{}` collides with a reserved file name", t.name)));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut features = Vec::new();
    for t in ds.tasks() {
        let path = dir.join(format!("{}.csv", t.name));
        let mut w = writer(&path)?;
        let mut header = vec!["id".to_string()];
        header.extend((0..t.n_features()).map(|k| format!("f{k}")));
        w.write_record(&header).map_err(|e| csv_error(&path, e))?;
        for (j, id) in t.sample_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(t.x.row(j).iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(|e| csv_error(&path, e))?;
        }
        finish(&path, w)?;
        features.push(path);
    }

    let scores = dir.join("scores.csv");
    let mut w = writer(&scores)?;
    w.write_record(["id", "task", "score"]).map_err(|e| csv_error(&scores, e))?;
    for t in ds.tasks() {
        for (j, id) in t.sample_ids.iter().enumerate() {
            w.write_record([id.as_str(), t.name.as_str(), &t.y[j].to_string()])
                .map_err(|e| csv_error(&scores, e))?;
        }
    }
    finish(&scores, w)?;

    let raters = if ds.tasks().iter().any(|t| t.raters.is_some()) {
        let path = dir.join("raters.csv");
        let mut w = writer(&path)?;
        w.write_record(["id", "task", "rater", "score"]).map_err(|e| csv_error(&path, e))?;
        for t in ds.tasks() {
            let Some(r) = &t.raters else { continue };
            for (id, ratings) in t.sample_ids.iter().zip(r) {
                for (k, v) in ratings.iter().enumerate() {
                    w.write_record([id.as_str(), t.name.as_str(), &format!("r{k}"), &v.to_string()])
                        .map_err(|e| csv_error(&path, e))?;
                }
            }
        }
        finish(&path, w)?;
        Some(path)
    } else {
        None
    };

    Ok(WrittenFiles {
        features,
        scores,
        raters,
    })
}
