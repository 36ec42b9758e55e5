//! CSV outputs of an experiment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use riemsub::metrics::{performance_profile, Profile, ProfileTable};

use crate::config::CostMetric;
use crate::error::{CliError, CliResult};
use crate::run::{RunRecord, TraceRow};

pub const SUMMARY_HEADER: [&str; 18] = [
    "problem",
    "solver",
    "rep",
    "seed",
    "jobs",
    "status",
    "iterations",
    "wall_time_s",
    "phi_initial",
    "phi_final",
    "total_backtracks",
    "evaluations",
    "h",
    "c",
    "v",
    "ari",
    "invariant_violations",
    "error",
];

pub const TRACE_HEADER: [&str; 9] = ["k", "phi", "R", "tau", "dir_norm", "w_norm", "backtracks", "delta_k", "time_s"];

/// Columns averaged in `aggregate.csv`.
pub const AGGREGATE_FIELDS: [&str; 8] = ["iterations", "wall_time_s", "phi_final", "evaluations", "h", "c", "v", "ari"];

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn trace_file_name(r: &RunRecord) -> String {
    format!("{}__{}__rep{}.csv", r.problem, r.solver, r.rep)
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            num(r.phi),
            num(r.reference),
            opt(r.tau),
            opt(r.dir_norm),
            opt(r.w_norm),
            r.backtracks.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.delta),
            opt(r.time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, records: &[RunRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in records {
        w.write_record([
            r.problem.clone(),
            r.solver.clone(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.jobs.to_string(),
            r.status.clone(),
            r.iterations.to_string(),
            num(r.wall_time_s),
            num(r.phi_initial),
            num(r.phi_final),
            r.total_backtracks.to_string(),
            r.evaluations.to_string(),
            opt(r.h),
            opt(r.c),
            opt(r.v),
            opt(r.ari),
            r.invariant_violations.to_string(),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field(r: &RunRecord, name: &str) -> Option<f64> {
    let v = match name {
        "iterations" => r.iterations as f64,
        "wall_time_s" => r.wall_time_s,
        "phi_final" => r.phi_final,
        "evaluations" => r.evaluations as f64,
        "h" => r.h?,
        "c" => r.c?,
        "v" => r.v?,
        "ari" => r.ari?,
        _ => return None,
    };
    v.is_finite().then_some(v)
}

/// Mean and sample standard deviation (`n − 1` denominator) of the present
/// values; the deviation is undefined below two values.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some(var.sqrt()))
}

/// Per (problem, solver): run and success counts, then mean and standard
/// deviation of each [`AGGREGATE_FIELDS`] column. Errored runs are left out
/// of the statistics.
pub fn write_aggregate(path: &Path, records: &[RunRecord]) -> CliResult<()> {
    let mut groups: Vec<((&str, &str), Vec<&RunRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(k, _)| *k == (r.problem.as_str(), r.solver.as_str())) {
            Some((_, g)) => g.push(r),
            None => groups.push(((&r.problem, &r.solver), vec![r])),
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["problem".to_string(), "solver".into(), "runs".into(), "successes".into()];
    for f in AGGREGATE_FIELDS {
        header.push(format!("{f}_mean"));
        header.push(format!("{f}_std"));
    }
    w.write_record(&header)?;
    for ((problem, solver), runs) in &groups {
        let mut row = vec![
            problem.to_string(),
            solver.to_string(),
            runs.len().to_string(),
            runs.iter().filter(|r| r.success).count().to_string(),
        ];
        for f in AGGREGATE_FIELDS {
            let vals: Vec<f64> = runs.iter().filter(|r| r.error.is_empty()).filter_map(|r| field(r, f)).collect();
            let (m, s) = mean_std(&vals);
            row.push(opt(m));
            row.push(opt(s));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Cost table with one column per (problem, repetition); failed runs cost
/// nothing and count as unsolved.
pub fn profile_table(records: &[RunRecord], metric: CostMetric) -> ProfileTable {
    let mut solvers: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), Option<f64>> = BTreeMap::new();
    for r in records {
        let s = position_or_push(&mut solvers, r.solver.clone());
        let q = position_or_push(&mut problems, format!("{}#{}", r.problem, r.rep));
        let cost = r.success.then(|| match metric {
            CostMetric::Time => r.wall_time_s.max(1e-9),
            CostMetric::Iterations => r.iterations.max(1) as f64,
            CostMetric::Evaluations => r.evaluations.max(1) as f64,
        });
        cells.insert((s, q), cost);
    }
    let costs = (0..solvers.len())
        .map(|s| (0..problems.len()).map(|q| cells.get(&(s, q)).copied().flatten()).collect())
        .collect();
    ProfileTable { solvers, problems, costs }
}

fn position_or_push(v: &mut Vec<String>, item: String) -> usize {
    match v.iter().position(|x| *x == item) {
        Some(i) => i,
        None => {
            v.push(item);
            v.len() - 1
        }
    }
}

pub fn write_profile_table(path: &Path, table: &ProfileTable) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["problem".to_string()];
    header.extend(table.solvers.iter().cloned());
    w.write_record(&header)?;
    for (q, name) in table.problems.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(table.costs.iter().map(|c| opt(c[q])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output of an experiment under `out`. Returns the profile
/// when `with_profile` is set.
pub fn write_all(
    out: &Path,
    records: &[RunRecord],
    with_profile: Option<CostMetric>,
) -> CliResult<Option<Profile>> {
    let traces = out.join("traces");
    fs::create_dir_all(&traces)?;
    for r in records {
        write_trace(&traces.join(trace_file_name(r)), &r.trace)?;
    }
    write_summary(&out.join("summary.csv"), records)?;
    write_aggregate(&out.join("aggregate.csv"), records)?;
    let Some(metric) = with_profile else {
        return Ok(None);
    };
    let table = profile_table(records, metric);
    write_profile_table(&out.join("profile_table.csv"), &table)?;
    let profile = performance_profile(&table).map_err(|e| CliError::Runtime(format!("performance profile: {e}")))?;
    let f = fs::File::create(out.join("profile.csv"))?;
    profile.write_delimited(std::io::BufWriter::new(f))?;
    Ok(Some(profile))
}
