use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riemsub-bench"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const VMF_SPEC: &str = "family = \"vmf_clusters\"\nl = 3\nn_per = 20\nambient_dim = 5\nkappa = 20.0\nseed = 7\n";

#[test]
fn gen_data_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "vmf.toml", VMF_SPEC);
    let spec = spec.to_str().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["gen-data", "--config", spec, "--out", out.to_str().unwrap()])), 0);
    }
    assert_eq!(code(&run(&["gen-data", "--config", spec, "--out", c.to_str().unwrap(), "--seed", "8"])), 0);
    let read = |d: &Path| fs::read(d.join("vmf.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        fs::read(a.join("vmf.meta.json")).unwrap(),
        fs::read(b.join("vmf.meta.json")).unwrap()
    );
    assert_eq!(fs::read_to_string(a.join("vmf.csv")).unwrap().lines().count(), 60);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &VMF_SPEC.replace("kappa = 20.0", "kappa = -1.0"));
    assert_eq!(code(&run(&["gen-data", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["gen-data"])), 2);
    assert_eq!(code(&run(&["solve", "--config", "/nonexistent.toml"])), 2);
    assert_eq!(code(&run(&["solve", "--bogus"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    let exp = write(
        dir.path(),
        "exp.toml",
        "[[problem]]\nname = \"x\"\nobjective = \"mssc\"\nclusters = 2\ndataset = \"missing.csv\"\n[[solver]]\nname = \"s\"\n",
    );
    assert_eq!(code(&run(&["solve", "--config", exp.to_str().unwrap()])), 2);
    let exp = write(
        dir.path(),
        "eps.toml",
        "[[problem]]\nname = \"x\"\nobjective = \"mssc\"\nclusters = 2\ngenerate = { family = \"gaussian_clusters\", l = 2, n_per = 3, dim = 2, seed = 1 }\n[[solver]]\nname = \"s\"\n",
    );
    assert_eq!(code(&run(&["solve", "--config", exp.to_str().unwrap(), "--epsilon", "-1"])), 2);
    assert_eq!(code(&run(&["solve", "--config", exp.to_str().unwrap(), "--jobs", "0"])), 2);
}

#[test]
fn two_point_dataset_is_solved_exactly() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "two.csv", "1,2\n3,4\n");
    let exp = write(
        dir.path(),
        "two.toml",
        "[[problem]]\nname = \"two\"\nobjective = \"mssc\"\nclusters = 2\ndataset = \"two.csv\"\n\
         [[solver]]\nname = \"nm\"\n[[solver]]\nname = \"dca\"\nmethod = \"dca\"\n",
    );
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", exp.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[col(&h, "phi_final")].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[col(&h, "error")], "");
    }
    assert_eq!(rows[0][col(&h, "status")], "stationary");
}

fn blobs_experiment(dir: &Path, reps: usize) -> PathBuf {
    write(
        dir,
        "blobs.toml",
        &format!(
            "repetitions = {reps}\nbase_seed = 10\n\n\
             [[problem]]\nname = \"blobs\"\nobjective = \"mssc\"\nclusters = 3\n\
             generate = {{ family = \"gaussian_clusters\", l = 3, n_per = 20, dim = 2, seed = 5 }}\n\n\
             [[problem]]\nname = \"mds\"\nobjective = \"mds\"\nfresh_data_per_rep = true\n\
             generate = {{ family = \"mds_random\", n = 8, source_dim = 3, embed_dim = 2, seed = 1 }}\n\n\
             [[solver]]\nname = \"mean\"\n\n\
             [[solver]]\nname = \"armijo\"\nreference = \"monotone\"\n\n\
             [[solver]]\nname = \"bdca\"\nmethod = \"bdca\"\n"
        ),
    )
}

#[test]
fn repetitions_use_distinct_seeds_and_aggregate_matches() {
    let dir = tempfile::tempdir().unwrap();
    let exp = blobs_experiment(dir.path(), 5);
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", exp.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(rows.len(), 2 * 5 * 3);
    let seeds: std::collections::BTreeSet<String> = rows.iter().map(|r| r[col(&h, "seed")].clone()).collect();
    assert_eq!(seeds.len(), 5);
    assert!(seeds.contains("10") && seeds.contains("14"));
    for r in &rows {
        let name = format!("{}__{}__rep{}.csv", r[0], r[1], r[2]);
        let (th, trows) = read_csv(&out.join("traces").join(name));
        assert_eq!(th.join(","), "k,phi,R,tau,dir_norm,w_norm,backtracks,delta_k,time_s");
        assert_eq!(trows.len(), r[col(&h, "iterations")].parse::<usize>().unwrap());
        assert_eq!(r[col(&h, "invariant_violations")], "0");
    }

    let (ah, arows) = read_csv(&out.join("aggregate.csv"));
    assert_eq!(arows.len(), 6);
    for a in &arows {
        for field in ["iterations", "phi_final", "evaluations"] {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r[0] == a[0] && r[1] == a[1])
                .map(|r| r[col(&h, field)].parse().unwrap())
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let got_mean: f64 = a[col(&ah, &format!("{field}_mean"))].parse().unwrap();
            let got_std: f64 = a[col(&ah, &format!("{field}_std"))].parse().unwrap();
            assert!((got_mean - mean).abs() <= 1e-12 * mean.abs().max(1.0), "{field} mean");
            assert!((got_std - std).abs() <= 1e-12 * std.abs().max(1.0), "{field} std");
        }
    }
}

#[test]
fn bench_writes_profile_of_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let exp = blobs_experiment(dir.path(), 2);
    let out = dir.path().join("out");
    let o = run(&["bench", "--config", exp.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("profile_table.csv"));
    assert_eq!(h, ["problem", "mean", "armijo", "bdca"]);
    assert_eq!(rows.len(), 4);
    let (ph, prow) = read_csv(&out.join("profile.csv"));
    assert_eq!(ph, ["tau", "mean", "armijo", "bdca"]);
    assert_eq!(prow[0][0], "1");
    let last = prow.last().unwrap();
    for v in &last[1..] {
        let rho: f64 = v.parse().unwrap();
        assert!((0.0..=1.0).contains(&rho));
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let exp = blobs_experiment(dir.path(), 3);
    let mut outs = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("out{jobs}"));
        let o = run(&["solve", "--config", exp.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(code(&o), 0);
        outs.push(out);
    }
    let strip = |p: &Path| {
        let (h, rows) = read_csv(&p.join("summary.csv"));
        let skip = [col(&h, "wall_time_s"), col(&h, "jobs")];
        rows.into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, v)| v).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&outs[0]), strip(&outs[1]));
}

#[test]
fn check_passes_and_detects_fault() {
    let o = run(&["check"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
    let o = run(&["check", "--fault", "flip-subgradient"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL fd/"));
}

#[test]
fn iris_runs_from_plain_csv() {
    let dir = tempfile::tempdir().unwrap();
    let iris = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv");
    let exp = write(
        dir.path(),
        "iris.toml",
        &format!(
            "[[problem]]\nname = \"iris\"\nobjective = \"cluster\"\nclusters = 3\nnormalize = true\ndataset = {:?}\n\
             [[solver]]\nname = \"nm\"\n",
            iris.to_str().unwrap()
        ),
    );
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", exp.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(rows[0][col(&h, "status")], "converged");
    assert!(rows[0][col(&h, "ari")].parse::<f64>().unwrap() > 0.5);
}
