//! Expanding a configuration into runs and executing them.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use riemsub::baselines::{bdca_solve, dca_solve, spherical_kmeans, DcaConfig};
use riemsub::diagnostics::SignFlipped;
use riemsub::geometry::{random_ambient, Ambient, Manifold, ManifoldPoint, StiefelRetraction};
use riemsub::metrics::{adjusted_rand_index, homogeneity_completeness_v, Partition};
use riemsub::objectives::{ClusterObjective, DissimilarityKind, LabeledDataset, Mds, Mssc, Objective};
use riemsub::solver::{check_trace, solve, IterationRecord, SolveResult, SolverConfig};
use riemsub::Error;

use crate::config::{ExperimentConfig, Method, ObjectiveKind, ProblemConfig, SolverEntry};
use crate::data::{self, ProblemData};
use crate::error::{invalid, CliError, CliResult};

/// Tolerance for the per-step descent check on baseline traces.
const DESCENT_TOL: f64 = 1e-10;

/// One row of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub phi: f64,
    pub reference: f64,
    pub tau: Option<f64>,
    pub dir_norm: Option<f64>,
    pub w_norm: Option<f64>,
    pub backtracks: Option<usize>,
    pub delta: Option<f64>,
    pub time_s: Option<f64>,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        TraceRow {
            k: r.k,
            phi: r.phi,
            reference: r.reference,
            tau: Some(r.tau),
            dir_norm: Some(r.dir_norm),
            w_norm: Some(r.w_norm),
            backtracks: Some(r.backtracks),
            delta: Some(r.delta),
            time_s: Some(r.time_s),
        }
    }
}

/// Outcome of one (problem, solver, repetition) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub rep: usize,
    pub seed: u64,
    pub jobs: usize,
    pub status: String,
    pub success: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub phi_initial: f64,
    pub phi_final: f64,
    pub total_backtracks: usize,
    pub evaluations: usize,
    pub h: Option<f64>,
    pub c: Option<f64>,
    pub v: Option<f64>,
    pub ari: Option<f64>,
    pub invariant_violations: usize,
    pub error: String,
    pub trace: Vec<TraceRow>,
}

/// Objective built for one instance.
enum Built {
    Cluster(ClusterObjective),
    Mssc(Mssc),
    Mds(Mds),
}

impl Built {
    fn as_objective(&self) -> &dyn Objective {
        match self {
            Built::Cluster(o) => o,
            Built::Mssc(o) => o,
            Built::Mds(o) => o,
        }
    }

    fn manifold(&self) -> &Manifold {
        self.as_objective().manifold()
    }

    fn cluster(&self) -> Option<&ClusterObjective> {
        match self {
            Built::Cluster(o) => Some(o),
            Built::Mssc(o) => Some(o.inner()),
            Built::Mds(_) => None,
        }
    }
}

fn with_retraction(d: &LabeledDataset, r: StiefelRetraction) -> riemsub::Result<LabeledDataset> {
    if d.manifold().retraction() == r {
        return Ok(d.clone());
    }
    LabeledDataset::new(
        d.name(),
        d.manifold().clone().with_retraction(r),
        d.points().to_vec(),
        d.labels().map(<[usize]>::to_vec),
    )
}

fn build(problem: &ProblemConfig, data: &ProblemData, retraction: Option<StiefelRetraction>) -> CliResult<Built> {
    let ctx = |e: Error| CliError::Invalid(format!("problem {:?}: {e}", problem.name));
    match (problem.objective, data) {
        (ObjectiveKind::Cluster, ProblemData::Clusters(d)) => {
            let d = with_retraction(d, retraction.unwrap_or_default()).map_err(ctx)?;
            let kind = problem.dissimilarity.unwrap_or_else(|| DissimilarityKind::default_for(&d.factor()));
            Ok(Built::Cluster(
                ClusterObjective::new(d, problem.clusters.unwrap_or(0), kind).map_err(ctx)?,
            ))
        }
        (ObjectiveKind::Mssc, ProblemData::Clusters(d)) => {
            if problem.dissimilarity.is_some_and(|k| k != DissimilarityKind::SquaredEuclidean) {
                return invalid(format!("problem {:?}: mssc uses the squared Euclidean distance", problem.name));
            }
            Ok(Built::Mssc(Mssc::new(d.clone(), problem.clusters.unwrap_or(0)).map_err(ctx)?))
        }
        (ObjectiveKind::Mds, ProblemData::Mds { delta, embed_dim }) => {
            let Some(dim) = problem.embed_dim.or(*embed_dim) else {
                return invalid(format!("problem {:?}: embed_dim is required", problem.name));
            };
            Ok(Built::Mds(Mds::new(delta.clone(), dim).map_err(ctx)?))
        }
        _ => invalid(format!("problem {:?}: objective does not match the data kind", problem.name)),
    }
}

/// Starting point drawn with `seed`: `l` distinct data points for
/// clustering, standard normal coordinates for MDS.
pub fn initial_point(objective: &dyn Objective, data: &ProblemData, seed: u64) -> CliResult<ManifoldPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = objective.manifold().clone();
    match data {
        ProblemData::Clusters(d) => {
            let l = m.num_components();
            if d.len() < l {
                return invalid(format!("{} points cannot seed {l} centers", d.len()));
            }
            let idx = sample(&mut rng, d.len(), l).into_vec();
            let parts = idx.iter().map(|&j| d.point(j).clone()).collect();
            Ok(ManifoldPoint::new(m, Ambient::new(parts))?)
        }
        ProblemData::Mds { .. } => Ok(ManifoldPoint::new(m.clone(), random_ambient(&m, &mut rng))?),
    }
}

/// Resolved settings of one solver on one problem.
#[derive(Debug, Clone)]
enum Plan {
    Subgradient(SolverConfig),
    Dca(DcaConfig),
    Kmeans { max_iter: usize, epsilon: f64 },
}

fn plan(entry: &SolverEntry, manifold: &Manifold, epsilon: Option<f64>) -> CliResult<Plan> {
    Ok(match entry.method {
        Method::Subgradient => Plan::Subgradient(entry.solver_config(manifold, epsilon)?),
        Method::Dca | Method::Bdca => Plan::Dca(entry.dca_config(manifold, epsilon)?),
        Method::SphericalKmeans => Plan::Kmeans {
            max_iter: entry.max_iter.unwrap_or(1000),
            epsilon: entry.epsilon_or(epsilon),
        },
    })
}

/// Fault injected into every objective, for self-tests of the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    FlipSubgradient,
}

fn partition_scores(built: &Built, x: &ManifoldPoint) -> CliResult<[Option<f64>; 4]> {
    let Some(c) = built.cluster() else {
        return Ok([None; 4]);
    };
    let Some(truth) = c.data().labels() else {
        return Ok([None; 4]);
    };
    let pred = Partition::new(c.assign(x)?, c.clusters())?;
    let truth = Partition::from_labels(truth.to_vec());
    let v = homogeneity_completeness_v(&pred, &truth)?;
    let ari = adjusted_rand_index(&pred, &truth)?;
    Ok([Some(v.homogeneity), Some(v.completeness), Some(v.v_measure), Some(ari)])
}

fn descent_violations(result: &SolveResult) -> usize {
    let mut prev = result.phi_initial;
    let mut n = 0;
    for r in &result.trace {
        if r.phi > prev + DESCENT_TOL * prev.abs().max(1.0) {
            n += 1;
        }
        prev = r.phi;
    }
    n
}

struct Outcome {
    status: String,
    success: bool,
    x_final: ManifoldPoint,
    phi_initial: f64,
    phi_final: f64,
    iterations: usize,
    evaluations: usize,
    violations: usize,
    trace: Vec<TraceRow>,
}

fn from_solve(result: SolveResult, violations: usize) -> Outcome {
    Outcome {
        status: result.status.as_str().to_string(),
        success: result.status.is_success(),
        phi_initial: result.phi_initial,
        phi_final: result.phi_final,
        iterations: result.iterations(),
        evaluations: result.evaluations,
        violations,
        trace: result.trace.iter().map(TraceRow::from).collect(),
        x_final: result.x_final,
    }
}

fn execute(built: &Built, plan: &Plan, x0: ManifoldPoint, fault: Fault) -> CliResult<Outcome> {
    Ok(match (plan, built) {
        (Plan::Subgradient(cfg), _) => {
            let result = match fault {
                Fault::None => solve(built.as_objective(), x0, cfg)?,
                Fault::FlipSubgradient => solve(&SignFlipped(built.as_objective()), x0, cfg)?,
            };
            let v = check_trace(&result, cfg).len();
            from_solve(result, v)
        }
        (Plan::Dca(cfg), Built::Mssc(o)) => {
            let r = if cfg.bdca.is_some() { bdca_solve(o, x0, cfg)? } else { dca_solve(o, x0, cfg)? };
            let v = descent_violations(&r);
            from_solve(r, v)
        }
        (Plan::Dca(cfg), Built::Mds(o)) => {
            let r = if cfg.bdca.is_some() { bdca_solve(o, x0, cfg)? } else { dca_solve(o, x0, cfg)? };
            let v = descent_violations(&r);
            from_solve(r, v)
        }
        (Plan::Kmeans { max_iter, epsilon }, Built::Cluster(o)) => {
            let phi_initial = o.value(&x0)?;
            let r = spherical_kmeans(o.data(), &x0, *max_iter, *epsilon)?;
            let trace = r
                .objective
                .iter()
                .enumerate()
                .map(|(k, &phi)| TraceRow {
                    k,
                    phi,
                    reference: phi,
                    tau: None,
                    dir_norm: None,
                    w_norm: None,
                    backtracks: None,
                    delta: None,
                    time_s: None,
                })
                .collect();
            Outcome {
                status: if r.converged { "converged" } else { "max_iter" }.to_string(),
                success: r.converged,
                phi_initial,
                phi_final: r.objective.last().copied().unwrap_or(phi_initial),
                iterations: r.iterations,
                evaluations: r.iterations,
                violations: 0,
                trace,
                x_final: r.centers,
            }
        }
        _ => return invalid("solver method does not apply to this objective"),
    })
}

/// One scheduled run.
struct Task {
    instance: usize,
    problem: usize,
    solver: usize,
    rep: usize,
}

/// Runs every (problem, repetition, solver) triple of `config` on a pool of
/// `config.jobs` threads. Records come back in task order.
///
/// Configuration and data problems abort with [`CliError::Invalid`] before
/// anything runs; errors raised by a solver are recorded in the run's row.
pub fn run_experiment(config: &ExperimentConfig, fault: Fault) -> CliResult<Vec<RunRecord>> {
    config.validate()?;
    // (problem, rep) -> data; shared across reps unless regenerated.
    let mut instances: Vec<Arc<ProblemData>> = Vec::new();
    let mut instance_of = Vec::new();
    for p in &config.problems {
        let mut row = Vec::with_capacity(config.repetitions);
        for rep in 0..config.repetitions {
            if rep > 0 && !p.fresh_data_per_rep {
                row.push(row[0]);
                continue;
            }
            let data = match (&p.generate, &p.dataset) {
                (Some(spec), _) => {
                    let mut spec = spec.clone();
                    spec.seed = spec.seed.wrapping_add(if p.fresh_data_per_rep { rep as u64 } else { 0 });
                    ProblemData::from(
                        spec.generate()
                            .map_err(|e| CliError::Invalid(format!("problem {:?}: {e}", p.name)))?,
                    )
                }
                (None, Some(path)) => data::load(path, p.normalize)?,
                (None, None) => unreachable!("validated"),
            };
            instances.push(Arc::new(data));
            row.push(instances.len() - 1);
        }
        instance_of.push(row);
    }

    let mut plans = Vec::new();
    for (pi, p) in config.problems.iter().enumerate() {
        let mut row = Vec::new();
        for s in &config.solvers {
            let built = build(p, &instances[instance_of[pi][0]], s.retraction)?;
            row.push(plan(s, built.manifold(), config.epsilon)?);
        }
        plans.push(row);
    }

    let mut tasks = Vec::new();
    for (pi, _) in config.problems.iter().enumerate() {
        for rep in 0..config.repetitions {
            for si in 0..config.solvers.len() {
                tasks.push(Task { instance: instance_of[pi][rep], problem: pi, solver: si, rep });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let records = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let p = &config.problems[t.problem];
                let s = &config.solvers[t.solver];
                let data = &instances[t.instance];
                let seed = config.base_seed.wrapping_add(t.rep as u64);
                let mut rec = RunRecord {
                    problem: p.name.clone(),
                    solver: s.name.clone(),
                    rep: t.rep,
                    seed,
                    jobs: config.jobs,
                    status: "error".into(),
                    success: false,
                    iterations: 0,
                    wall_time_s: 0.0,
                    phi_initial: f64::NAN,
                    phi_final: f64::NAN,
                    total_backtracks: 0,
                    evaluations: 0,
                    h: None,
                    c: None,
                    v: None,
                    ari: None,
                    invariant_violations: 0,
                    error: String::new(),
                    trace: Vec::new(),
                };
                let built = build(p, data, s.retraction)?;
                let x0 = initial_point(built.as_objective(), data, seed)?;
                let start = Instant::now();
                let outcome = execute(&built, &plans[t.problem][t.solver], x0, fault);
                rec.wall_time_s = start.elapsed().as_secs_f64();
                match outcome {
                    Ok(o) => {
                        let [h, c, v, ari] = partition_scores(&built, &o.x_final)?;
                        rec.status = o.status;
                        rec.success = o.success;
                        rec.iterations = o.iterations;
                        rec.phi_initial = o.phi_initial;
                        rec.phi_final = o.phi_final;
                        rec.total_backtracks = o.trace.iter().filter_map(|r| r.backtracks).sum();
                        rec.evaluations = o.evaluations;
                        rec.invariant_violations = o.violations;
                        (rec.h, rec.c, rec.v, rec.ari) = (h, c, v, ari);
                        rec.trace = o.trace;
                    }
                    Err(e) => rec.error = e.to_string(),
                }
                Ok(rec)
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    Ok(records)
}
