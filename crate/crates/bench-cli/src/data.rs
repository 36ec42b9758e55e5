//! Dataset files.
//!
//! A dataset is a CSV file with one row per point. Matrix-valued points are
//! flattened row by row; an optional last column holds integer labels. A
//! sidecar `<stem>.meta.json` records the manifold and how the file was
//! produced. Without a sidecar the file is read as plain Euclidean data: a
//! header row is detected automatically and a non-numeric last column is
//! taken as class names, numbered in order of first appearance.
//!
//! MDS instances store the dissimilarity matrix, one row per line.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use riemsub::geometry::{Factor, Manifold};
use riemsub::objectives::LabeledDataset;
use riemsub::synthgen::{GenSpec, Generated, MdsInstance};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Meta {
    Clusters {
        name: String,
        factor: Factor,
        n_points: usize,
        has_labels: bool,
        spec: Option<GenSpec>,
    },
    Mds {
        n: usize,
        embed_dim: usize,
        spec: Option<GenSpec>,
    },
}

/// Data of one problem instance.
#[derive(Debug, Clone)]
pub enum ProblemData {
    Clusters(LabeledDataset),
    Mds { delta: DMatrix<f64>, embed_dim: Option<usize> },
}

impl From<Generated> for ProblemData {
    fn from(g: Generated) -> Self {
        match g {
            Generated::Clusters(d) => ProblemData::Clusters(d),
            Generated::Mds(MdsInstance { delta, embed_dim, .. }) => ProblemData::Mds {
                delta,
                embed_dim: Some(embed_dim),
            },
        }
    }
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.meta.json"))
}

fn fmt_row(values: impl IntoIterator<Item = f64>) -> Vec<String> {
    values.into_iter().map(|v| format!("{v}")).collect()
}

/// Writes `generated` to `csv` and its sidecar.
pub fn write_generated(csv: &Path, generated: &Generated, spec: Option<&GenSpec>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(csv)?;
    let meta = match generated {
        Generated::Clusters(d) => {
            for (j, p) in d.points().iter().enumerate() {
                let mut row = fmt_row(row_major(p));
                if let Some(l) = d.labels() {
                    row.push(l[j].to_string());
                }
                w.write_record(&row)?;
            }
            Meta::Clusters {
                name: d.name().to_string(),
                factor: d.factor(),
                n_points: d.len(),
                has_labels: d.labels().is_some(),
                spec: spec.cloned(),
            }
        }
        Generated::Mds(inst) => {
            for r in inst.delta.row_iter() {
                w.write_record(fmt_row(r.iter().copied()))?;
            }
            Meta::Mds {
                n: inst.delta.nrows(),
                embed_dim: inst.embed_dim,
                spec: spec.cloned(),
            }
        }
    };
    w.flush()?;
    let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(meta_path(csv), json + "\n")?;
    Ok(())
}

fn row_major(m: &DMatrix<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| m[(i, j)]))
}

fn read_records(path: &Path) -> CliResult<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return invalid(format!("{} holds no data", path.display()));
    }
    Ok(rows)
}

fn parse_f64(field: &str, path: &Path, line: usize) -> CliResult<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => invalid(format!("{}:{line}: {field:?} is not a finite number", path.display())),
    }
}

/// Loads a dataset, using the sidecar when present.
pub fn load(path: &Path, normalize: bool) -> CliResult<ProblemData> {
    let mp = meta_path(path);
    if mp.exists() {
        let text = fs::read_to_string(&mp)?;
        let meta: Meta =
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", mp.display())))?;
        load_with_meta(path, &meta)
    } else {
        load_plain(path, normalize).map(ProblemData::Clusters)
    }
}

fn load_with_meta(path: &Path, meta: &Meta) -> CliResult<ProblemData> {
    let rows = read_records(path)?;
    match meta {
        Meta::Clusters { name, factor, n_points, has_labels, .. } => {
            if rows.len() != *n_points {
                return invalid(format!("{}: expected {n_points} rows, found {}", path.display(), rows.len()));
            }
            let (nr, nc) = factor.shape();
            let width = nr * nc + usize::from(*has_labels);
            let mut points = Vec::with_capacity(rows.len());
            let mut labels = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                if row.len() != width {
                    return invalid(format!("{}:{}: expected {width} fields, found {}", path.display(), i + 1, row.len()));
                }
                let vals = row[..nr * nc]
                    .iter()
                    .map(|f| parse_f64(f, path, i + 1))
                    .collect::<CliResult<Vec<_>>>()?;
                points.push(DMatrix::from_row_slice(nr, nc, &vals));
                if *has_labels {
                    let l = row[nr * nc]
                        .parse::<usize>()
                        .map_err(|_| CliError::Invalid(format!("{}:{}: bad label", path.display(), i + 1)))?;
                    labels.push(l);
                }
            }
            let manifold = Manifold::from_factors(vec![*factor])?;
            let labels = has_labels.then_some(labels);
            Ok(ProblemData::Clusters(LabeledDataset::new(name.clone(), manifold, points, labels)?))
        }
        Meta::Mds { n, embed_dim, .. } => {
            if rows.len() != *n || rows.iter().any(|r| r.len() != *n) {
                return invalid(format!("{}: expected a {n} x {n} matrix", path.display()));
            }
            let mut vals = Vec::with_capacity(n * n);
            for (i, row) in rows.iter().enumerate() {
                for f in row {
                    vals.push(parse_f64(f, path, i + 1)?);
                }
            }
            Ok(ProblemData::Mds {
                delta: DMatrix::from_row_slice(*n, *n, &vals),
                embed_dim: Some(*embed_dim),
            })
        }
    }
}

/// Plain numeric CSV, optionally with a header row and a class-name column.
pub fn load_plain(path: &Path, normalize: bool) -> CliResult<LabeledDataset> {
    let mut rows = read_records(path)?;
    let numeric = |f: &str| f.parse::<f64>().is_ok();
    if !rows[0].iter().take(rows[0].len().saturating_sub(1)).all(|f| numeric(f)) {
        rows.remove(0);
    }
    if rows.is_empty() {
        return invalid(format!("{} holds only a header", path.display()));
    }
    let width = rows[0].len();
    let has_labels = rows.iter().any(|r| r.last().is_some_and(|f| !numeric(f)));
    let dim = width - usize::from(has_labels);
    if dim == 0 {
        return invalid(format!("{} has no feature columns", path.display()));
    }
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut points = Vec::with_capacity(rows.len());
    let mut labels = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return invalid(format!("{}: row {} has {} fields, expected {width}", path.display(), i + 1, row.len()));
        }
        let mut v = row[..dim]
            .iter()
            .map(|f| parse_f64(f, path, i + 1))
            .collect::<CliResult<Vec<_>>>()?;
        if normalize {
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n == 0.0 {
                return invalid(format!("{}: row {} is zero and cannot be normalized", path.display(), i + 1));
            }
            v.iter_mut().for_each(|a| *a /= n);
        }
        points.push(DMatrix::from_vec(dim, 1, v));
        if has_labels {
            let next = names.len();
            labels.push(*names.entry(row[dim].clone()).or_insert(next));
        }
    }
    let manifold = if normalize {
        if dim < 2 {
            return invalid("normalized data needs at least two features");
        }
        Manifold::sphere(dim)?
    } else {
        Manifold::euclidean(dim)?
    };
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(LabeledDataset::new(name, manifold, points, has_labels.then_some(labels))?)
}
