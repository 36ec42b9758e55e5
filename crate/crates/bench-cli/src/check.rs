//! Numerical self-test battery behind the `check` subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riemsub::baselines::{dca_solve, DcaConfig};
use riemsub::diagnostics::{
    assignment_margin, dc_gradient_residual, dc_identity_residual, fd_subgradient_error, geometry_report,
    grassmann_invariance_residual, upper_c2_violations, CheckOutcome, SignFlipped,
};
use riemsub::geometry::{random_point, Manifold, ManifoldPoint, StiefelRetraction};
use riemsub::objectives::{ClusterObjective, DcObjective, DissimilarityKind, LabeledDataset, Mds, Mssc, Objective};
use riemsub::solver::{check_trace, solve, PSchedule, SolveResult, SolverConfig};
use riemsub::synthgen::{gen_frame_clusters, gen_gaussian_clusters, gen_mds_instance, gen_vmf_clusters, FrameTarget};
use riemsub::Result;

use crate::error::CliResult;
use crate::run::Fault;

pub const FD_STEP: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-4;
/// Centers closer than this to an assignment tie are redrawn before
/// finite differencing.
pub const FD_MARGIN: f64 = 1e-3;
pub const DC_TOL: f64 = 1e-10;

const GEOMETRY_TRIALS: usize = 50;
const FD_INSTANCES: usize = 10;
const FD_DIRECTIONS: usize = 8;
const CANNED_EPSILON: f64 = 1e-10;

fn maybe_flipped<O: Objective>(o: O, fault: Fault) -> Box<dyn Objective>
where
    O: 'static,
{
    match fault {
        Fault::None => Box::new(o),
        Fault::FlipSubgradient => Box::new(SignFlipped(o)),
    }
}

/// Random centers on `obj`'s domain whose nearest-center assignment has at
/// least [`FD_MARGIN`] to spare.
fn centers_with_margin(obj: &ClusterObjective, rng: &mut ChaCha8Rng) -> ManifoldPoint {
    loop {
        let x = random_point(obj.manifold(), rng);
        if assignment_margin(&x, obj.data(), obj.kind()) >= FD_MARGIN {
            return x;
        }
    }
}

fn fd_cluster_check(
    name: &str,
    make: impl Fn(&mut ChaCha8Rng) -> Result<LabeledDataset>,
    clusters: usize,
    fault: Fault,
    rng: &mut ChaCha8Rng,
) -> CliResult<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..FD_INSTANCES {
        let data = make(rng)?;
        let kind = DissimilarityKind::default_for(&data.factor());
        let obj = ClusterObjective::new(data, clusters, kind)?;
        let x = centers_with_margin(&obj, rng);
        let oracle = maybe_flipped(obj, fault);
        worst = worst.max(fd_subgradient_error(oracle.as_ref(), &x, FD_DIRECTIONS, FD_STEP, rng)?);
    }
    Ok(CheckOutcome::new(format!("fd/{name}"), worst, FD_TOL, FD_INSTANCES))
}

fn gaussian_points(m: &Manifold, scale: f64, rng: &mut ChaCha8Rng) -> ManifoldPoint {
    let x = random_point(m, rng);
    ManifoldPoint::new(m.clone(), x.coords().scale(scale)).expect("vector space")
}

fn mssc_instance(rng: &mut ChaCha8Rng) -> Result<(Mssc, ManifoldPoint)> {
    let data = gen_gaussian_clusters(3, 15, 2, 10.0, 1.0, rng)?;
    let obj = Mssc::new(data, 3)?;
    let x = gaussian_points(obj.manifold(), 5.0, rng);
    Ok((obj, x))
}

fn mds_instance(rng: &mut ChaCha8Rng) -> Result<(Mds, ManifoldPoint)> {
    let inst = gen_mds_instance(6, 3, 2, rng)?;
    let obj = Mds::new(inst.delta, 2)?;
    let x = gaussian_points(obj.manifold(), 1.0, rng);
    Ok((obj, x))
}

fn dc_checks<O: DcObjective>(
    name: &str,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Result<(O, ManifoldPoint)>,
    rng: &mut ChaCha8Rng,
) -> CliResult<Vec<CheckOutcome>> {
    let (mut ident, mut grad) = (0.0f64, 0.0f64);
    for _ in 0..FD_INSTANCES {
        let (o, x) = make(rng)?;
        ident = ident.max(dc_identity_residual(&o, &x, 1e-3)?);
        grad = grad.max(dc_gradient_residual(&o, &x, 1e-3)?);
    }
    Ok(vec![
        CheckOutcome::new(format!("dc/{name}_identity"), ident, DC_TOL, FD_INSTANCES),
        CheckOutcome::new(format!("dc/{name}_gradient"), grad, DC_TOL, FD_INSTANCES),
    ])
}

fn canned_problem(seed: u64) -> Result<(Mssc, ManifoldPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = gen_gaussian_clusters(3, 30, 2, 10.0, 1.0, &mut rng)?;
    let x0 = data.centers_from_indices(&[0, 1, 2])?;
    Ok((Mssc::new(data, 3)?, x0))
}

fn phi_gap(a: &SolveResult, b: &SolveResult) -> f64 {
    if a.trace.len() != b.trace.len() {
        return f64::INFINITY;
    }
    a.trace
        .iter()
        .zip(&b.trace)
        .map(|(p, q)| (p.phi - q.phi).abs().max((p.reference - q.reference).abs()))
        .fold(0.0, f64::max)
}

/// Runs every check with `seed`. Fault injection applies to the
/// subgradient oracles and the canned solver runs.
pub fn run_checks(seed: u64, fault: Fault) -> CliResult<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let manifolds = [
        ("euclidean", Manifold::euclidean(4)?),
        ("sphere", Manifold::sphere(5)?),
        ("stiefel_polar", Manifold::stiefel(6, 3)?),
        ("stiefel_qr", Manifold::stiefel(6, 3)?.with_retraction(StiefelRetraction::Qr)),
        ("grassmann", Manifold::grassmann(5, 2)?),
        ("sphere_power", Manifold::sphere(3)?.power(3)?),
    ];
    for (label, m) in &manifolds {
        out.extend(geometry_report(m, GEOMETRY_TRIALS, &mut rng)?.outcomes(&format!("geometry/{label}")));
    }

    let mut worst: f64 = 0.0;
    for _ in 0..FD_INSTANCES {
        let (o, x) = loop {
            let (o, x) = mssc_instance(&mut rng)?;
            if assignment_margin(&x, o.inner().data(), DissimilarityKind::SquaredEuclidean) >= FD_MARGIN {
                break (o, x);
            }
        };
        let oracle = maybe_flipped(o, fault);
        worst = worst.max(fd_subgradient_error(oracle.as_ref(), &x, FD_DIRECTIONS, FD_STEP, &mut rng)?);
    }
    out.push(CheckOutcome::new("fd/mssc", worst, FD_TOL, FD_INSTANCES));
    let mut worst: f64 = 0.0;
    for _ in 0..FD_INSTANCES {
        let (o, x) = mds_instance(&mut rng)?;
        let oracle = maybe_flipped(o, fault);
        worst = worst.max(fd_subgradient_error(oracle.as_ref(), &x, FD_DIRECTIONS, FD_STEP, &mut rng)?);
    }
    out.push(CheckOutcome::new("fd/mds", worst, FD_TOL, FD_INSTANCES));
    out.push(fd_cluster_check("cosine", |r| gen_vmf_clusters(3, 10, 5, 20.0, r), 3, fault, &mut rng)?);
    out.push(fd_cluster_check(
        "stiefel_trace",
        |r| gen_frame_clusters(5, 2, 2, 10, 0.3, FrameTarget::Stiefel, r),
        2,
        fault,
        &mut rng,
    )?);
    out.push(fd_cluster_check(
        "grassmann_projector",
        |r| gen_frame_clusters(5, 2, 2, 10, 0.3, FrameTarget::Grassmann, r),
        2,
        fault,
        &mut rng,
    )?);

    out.extend(dc_checks("mssc", mssc_instance, &mut rng)?);
    out.extend(dc_checks("mds", mds_instance, &mut rng)?);

    let mut violations = 0;
    let mut pairs = 0;
    for _ in 0..FD_INSTANCES {
        let (o, x) = mssc_instance(&mut rng)?;
        violations += upper_c2_violations(&o, &x, 50, 1.0, 1.0, &mut rng)?;
        pairs += 50;
    }
    out.push(CheckOutcome::new("upper_c2/mssc", violations as f64, 0.0, pairs));

    let mut worst: f64 = 0.0;
    for _ in 0..FD_INSTANCES {
        let data = gen_frame_clusters(5, 2, 2, 10, 0.3, FrameTarget::Grassmann, &mut rng)?;
        let o = ClusterObjective::new(data, 2, DissimilarityKind::GrassmannProjector)?;
        let x = random_point(o.manifold(), &mut rng);
        worst = worst.max(grassmann_invariance_residual(&o, &x, &mut rng)?);
    }
    out.push(CheckOutcome::new("grassmann_invariance", worst, 1e-12, FD_INSTANCES));

    let (obj, x0) = canned_problem(seed)?;
    let oracle = maybe_flipped(obj.clone(), fault);
    let runs = [
        ("mean", SolverConfig::mean(0.6)),
        ("adaptive", SolverConfig { p_schedule: PSchedule::Adaptive, p_min: 0.3, ..SolverConfig::mean(0.6) }),
        ("max", SolverConfig::max(5)),
        ("monotone", SolverConfig::monotone()),
    ]
    .map(|(l, c)| (l, c.with_epsilon(CANNED_EPSILON)));
    let mut results = Vec::new();
    for (label, cfg) in &runs {
        let r = solve(oracle.as_ref(), x0.clone(), cfg)?;
        let bad = check_trace(&r, cfg);
        out.push(CheckOutcome::new(format!("solver/invariants_{label}"), bad.len() as f64, 0.0, r.iterations()));
        results.push(r);
    }
    let monotone = &results[3];
    let p_one = solve(oracle.as_ref(), x0.clone(), &SolverConfig::mean(1.0).with_epsilon(CANNED_EPSILON))?;
    out.push(CheckOutcome::new("solver/mean_p1_is_monotone", phi_gap(&p_one, monotone), 0.0, p_one.iterations()));
    let window_one = solve(oracle.as_ref(), x0.clone(), &SolverConfig::max(1).with_epsilon(CANNED_EPSILON))?;
    out.push(CheckOutcome::new("solver/max_window1_is_monotone", phi_gap(&window_one, monotone), 0.0, window_one.iterations()));
    let ab = results[0].trace.iter().map(|r| (r.a - 1.0).abs().max((r.b - 1.0).abs())).fold(0.0, f64::max);
    out.push(CheckOutcome::new("solver/steepest_a_b_one", ab, 1e-12, results[0].iterations()));

    let dca = dca_solve(&obj, x0, &DcaConfig::default())?;
    let mut prev = dca.phi_initial;
    let mut ascent: f64 = 0.0;
    for r in &dca.trace {
        ascent = ascent.max((r.phi - prev) / prev.abs().max(1.0));
        prev = r.phi;
    }
    out.push(CheckOutcome::new("dca/monotone", ascent.max(0.0), 1e-12, dca.iterations()));
    Ok(out)
}
