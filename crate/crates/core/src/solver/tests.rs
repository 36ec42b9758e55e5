use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{random_point, Manifold};
use crate::objectives::{DissimilarityKind, FnObjective, ClusterObjective, LabeledDataset, Mssc};

fn point(m: &Manifold, v: Vec<f64>) -> ManifoldPoint {
    ManifoldPoint::new(m.clone(), Ambient::from_vec(v)).unwrap()
}

fn strip_time(trace: &[IterationRecord]) -> Vec<IterationRecord> {
    trace
        .iter()
        .map(|r| IterationRecord { time_s: 0.0, ..r.clone() })
        .collect()
}

fn assert_clean(result: &SolveResult, config: &SolverConfig) {
    let v = check_trace(result, config);
    assert!(v.is_empty(), "{}", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"));
}

#[test]
fn squared_norm_monotone() {
    let m = Manifold::euclidean(2).unwrap();
    let f = FnObjective::new(m.clone(), |x: &Ambient| (x.norm_squared(), x.scale(2.0)));
    let config = SolverConfig::monotone().with_epsilon(1e-14).with_max_iter(200);
    let res = solve(&f, point(&m, vec![1.0, 0.0]), &config).unwrap();
    assert!(res.x_final.coords().norm() < 1e-6);
    let mut last = res.phi_initial;
    for rec in &res.trace {
        assert!(rec.phi < last);
        last = rec.phi;
    }
    assert_clean(&res, &config);
}

#[test]
fn squared_norm_constant_step() {
    let m = Manifold::euclidean(2).unwrap();
    let f = FnObjective::new(m.clone(), |x: &Ambient| (x.norm_squared(), x.scale(2.0)));
    let config = SolverConfig::monotone()
        .with_init_step(InitStep::Constant(0.1))
        .with_epsilon(1e-14)
        .with_max_iter(200);
    let res = solve(&f, point(&m, vec![1.0, 0.0]), &config).unwrap();
    assert!(res.x_final.coords().norm() < 1e-6, "{:?}", res.status);
    assert_clean(&res, &config);
}

#[test]
fn linear_on_sphere_reaches_pole() {
    let m = Manifold::sphere(3).unwrap();
    let f = FnObjective::new(m.clone(), |x: &Ambient| {
        (-x.part(0)[0], Ambient::from_vec(vec![-1.0, 0.0, 0.0]))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for config in [SolverConfig::default(), SolverConfig::monotone(), SolverConfig::max(5)] {
        let config = config.with_epsilon(1e-15).with_max_iter(500);
        for _ in 0..10 {
            let x0 = random_point(&m, &mut rng);
            if x0.coords().part(0)[0] < -0.99 {
                continue;
            }
            let res = solve(&f, x0, &config).unwrap();
            let x = res.x_final.coords().part(0);
            assert!((x[0] - 1.0).abs() < 1e-8, "{:?} {:?}", res.status, x);
            assert!((res.phi_final + 1.0).abs() < 1e-8);
            assert_clean(&res, &config);
        }
    }
}

#[test]
fn mean_rule_with_unit_p_matches_monotone() {
    let data = blobs(3, 40, 2, 11);
    let f = Mssc::new(data.clone(), 3).unwrap();
    let x0 = data.centers_from_indices(&[0, 1, 2]).unwrap();
    let mono = SolverConfig::monotone().with_max_iter(50);
    let mean = SolverConfig::mean(1.0).with_max_iter(50);
    let a = solve(&f, x0.clone(), &mono).unwrap();
    let b = solve(&f, x0, &mean).unwrap();
    assert_eq!(strip_time(&a.trace), strip_time(&b.trace));
    assert_eq!(a.x_final, b.x_final);
}

#[test]
fn runs_are_deterministic() {
    let data = blobs(4, 30, 3, 5);
    let f = Mssc::new(data.clone(), 4).unwrap();
    let x0 = data.centers_from_indices(&[0, 31, 62, 93]).unwrap();
    let config = SolverConfig::default().with_epsilon(1e-8);
    let a = solve(&f, x0.clone(), &config).unwrap();
    let b = solve(&f, x0, &config).unwrap();
    assert_eq!(strip_time(&a.trace), strip_time(&b.trace));
    assert_eq!(a.phi_final.to_bits(), b.phi_final.to_bits());
}

fn quadratic(m: &Manifold) -> impl Objective + '_ {
    let diag: Vec<f64> = (1..=5).map(|i| (i * i) as f64).collect();
    FnObjective::new(m.clone(), move |x: &Ambient| {
        let v = x.part(0);
        let g: Vec<f64> = v.iter().zip(&diag).map(|(x, a)| a * x).collect();
        let val = 0.5 * v.iter().zip(&g).map(|(x, g)| x * g).sum::<f64>();
        (val, Ambient::from_vec(g))
    })
}

fn iterations_to_gradient(res: &SolveResult, f: &impl Objective, tol: f64) -> Option<usize> {
    if let Some(k) = res.trace.iter().position(|r| r.w_norm <= tol) {
        return Some(k);
    }
    let w = f.evaluate(&res.x_final).unwrap().subgradient.norm();
    (w <= tol).then_some(res.trace.len())
}

#[test]
fn lbfgs_beats_steepest_descent_on_quadratic() {
    let m = Manifold::euclidean(5).unwrap();
    let f = quadratic(&m);
    let x0 = point(&m, vec![1.0, -1.0, 1.0, -1.0, 1.0]);
    let base = SolverConfig::default()
        .with_init_step(InitStep::Constant(1.0))
        .with_termination(TerminationMode::EuclideanBoth)
        .with_epsilon(1e-300)
        .with_max_iter(20_000);
    let qn = SolverConfig { direction: DirectionRule::LbfgsEuclidean { memory: 5 }, ..base.clone() };
    let rq = solve(&f, x0.clone(), &qn).unwrap();
    let rs = solve(&f, x0, &base).unwrap();
    let kq = iterations_to_gradient(&rq, &f, 1e-8).expect("L-BFGS reaches tolerance");
    let ks = iterations_to_gradient(&rs, &f, 1e-8).unwrap_or(usize::MAX);
    assert!(kq < ks, "lbfgs {kq} vs steepest {ks}");
    assert_clean(&rq, &qn);
}

#[test]
fn flipped_subgradient_stalls() {
    let m = Manifold::euclidean(2).unwrap();
    let f = FnObjective::new(m.clone(), |x: &Ambient| (x.norm_squared(), x.scale(-2.0)));
    let config = SolverConfig::default();
    let res = solve(&f, point(&m, vec![1.0, 1.0]), &config).unwrap();
    assert_eq!(res.status, SolveStatus::LinesearchStalled);
    assert!(res.trace.is_empty());
    assert!(res.evaluations <= 1 + config.max_backtracks + 1);
}

#[test]
fn zero_subgradient_stops_immediately() {
    let m = Manifold::euclidean(2).unwrap();
    let f = FnObjective::new(m.clone(), |x: &Ambient| (x.norm_squared(), x.scale(2.0)));
    let res = solve(&f, point(&m, vec![0.0, 0.0]), &SolverConfig::default()).unwrap();
    assert_eq!(res.status, SolveStatus::StationaryZeroSubgradient);
    assert!(res.trace.is_empty());
}

#[test]
fn rejects_mismatched_start() {
    let m = Manifold::euclidean(2).unwrap();
    let f = FnObjective::new(m, |x: &Ambient| (x.norm_squared(), x.scale(2.0)));
    let other = Manifold::euclidean(3).unwrap();
    assert!(solve(&f, point(&other, vec![1.0, 0.0, 0.0]), &SolverConfig::default()).is_err());
}

#[test]
fn checker_catches_tampered_trace() {
    let data = blobs(2, 20, 2, 3);
    let f = Mssc::new(data.clone(), 2).unwrap();
    let config = SolverConfig::default();
    let mut res = solve(&f, data.centers_from_indices(&[0, 1]).unwrap(), &config).unwrap();
    assert!(!res.trace.is_empty());
    res.trace[0].phi = res.phi_initial + 1.0;
    let names: Vec<_> = check_trace(&res, &config).into_iter().map(|v| v.name).collect();
    assert!(names.contains(&"acceptance"));
    assert!(names.contains(&"sandwich_lower"));
}

/// Gaussian blobs in the plane with well separated centers.
fn blobs(clusters: usize, per: usize, dim: usize, seed: u64) -> LabeledDataset {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for c in 0..clusters {
        let center: Vec<f64> = (0..dim).map(|i| if i == 0 { 10.0 * c as f64 } else { 0.0 }).collect();
        for _ in 0..per {
            let v: Vec<f64> = center
                .iter()
                .map(|c| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    c + z
                })
                .collect();
            points.push(DMatrix::from_vec(dim, 1, v));
        }
    }
    LabeledDataset::new("blobs", Manifold::euclidean(dim).unwrap(), points, None).unwrap()
}

fn sphere_data(n: usize, dim: usize, seed: u64) -> LabeledDataset {
    let m = Manifold::sphere(dim).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| random_point(&m, &mut rng).coords().part(0).clone()).collect();
    LabeledDataset::new("sphere", m, points, None).unwrap()
}

fn any_config() -> impl Strategy<Value = SolverConfig> {
    let reference = prop_oneof![
        Just(ReferenceRule::Monotone),
        Just(ReferenceRule::Mean),
        (1usize..8).prop_map(|window| ReferenceRule::Max { window }),
    ];
    let schedule = prop_oneof![
        (0.05f64..=1.0).prop_map(PSchedule::Constant),
        Just(PSchedule::Adaptive),
    ];
    let init = prop_oneof![
        Just(InitStep::BarzilaiBorwein),
        (1e-3f64..10.0).prop_map(InitStep::Constant),
    ];
    (reference, schedule, init, 1e-5f64..0.5, 0.1f64..0.9).prop_map(|(reference, p_schedule, init_step, sigma, beta)| {
        let p_min = match p_schedule {
            PSchedule::Constant(p) => p,
            PSchedule::Adaptive => 0.3,
        };
        SolverConfig {
            reference,
            p_schedule,
            p_min,
            init_step,
            sigma,
            beta,
            // same stepsize range as 60 halvings
            max_backtracks: (60.0 * 0.5f64.ln() / beta.ln()).ceil() as usize,
            max_iter: 60,
            ..SolverConfig::default().with_epsilon(1e-12)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mssc_traces_satisfy_invariants(config in any_config(), seed in 0u64..1000) {
        let data = blobs(3, 15, 2, seed);
        let f = Mssc::new(data.clone(), 3).unwrap();
        let res = solve(&f, data.centers_from_indices(&[0, 1, 2]).unwrap(), &config).unwrap();
        prop_assert_ne!(res.status, SolveStatus::LinesearchStalled, "{:?}", res.trace.last());
        let v = check_trace(&res, &config);
        prop_assert!(v.is_empty(), "{:?}", v);
    }

    #[test]
    fn sphere_traces_satisfy_invariants(config in any_config(), seed in 0u64..1000) {
        let data = sphere_data(30, 4, seed);
        let f = ClusterObjective::new(data.clone(), 2, DissimilarityKind::Cosine).unwrap();
        let res = solve(&f, data.centers_from_indices(&[0, 1]).unwrap(), &config).unwrap();
        prop_assert_ne!(res.status, SolveStatus::LinesearchStalled);
        let v = check_trace(&res, &config);
        prop_assert!(v.is_empty(), "{:?}", v);
    }

    #[test]
    fn stiefel_traces_satisfy_invariants(config in any_config(), seed in 0u64..1000) {
        let m = Manifold::grassmann(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..20).map(|_| random_point(&m, &mut rng).coords().part(0).clone()).collect();
        let data = LabeledDataset::new("st", m, points, None).unwrap();
        let f = ClusterObjective::new(data.clone(), 2, DissimilarityKind::GrassmannProjector).unwrap();
        let res = solve(&f, data.centers_from_indices(&[0, 1]).unwrap(), &config).unwrap();
        let v = check_trace(&res, &config);
        prop_assert!(v.is_empty(), "{:?}", v);
        for x in res.x_final.coords().parts() {
            let gram = x.transpose() * x;
            prop_assert!((gram - DMatrix::<f64>::identity(2, 2)).norm() < 1e-8);
        }
    }
}
