use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use riemsub::synthgen::GenSpec;

use crate::check::run_checks;
use crate::config::ExperimentConfig;
use crate::data::write_generated;
use crate::error::{invalid, CliError, CliResult};
use crate::output::write_all;
use crate::run::{run_experiment, Fault};

#[derive(Debug, Parser)]
#[command(name = "riemsub-bench", version, about = "Benchmarks for nonmonotone Riemannian subgradient methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// TOML file: a dataset spec for gen-data, an experiment otherwise.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides the seed of the spec or experiment.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Stopping tolerance for every solver.
    #[arg(long, value_name = "X")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FaultArg {
    FlipSubgradient,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    GenData(Common),
    /// Run an experiment.
    Solve(Common),
    /// Run an experiment and compute performance profiles.
    Bench(Common),
    /// Run the numerical self-checks.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        fault: Option<FaultArg>,
    },
}

fn require_config(c: &Common) -> CliResult<&Path> {
    match &c.config {
        Some(p) => Ok(p),
        None => invalid("--config is required"),
    }
}

fn load_experiment(c: &Common) -> CliResult<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(require_config(c)?)?;
    if let Some(s) = c.seed {
        cfg.base_seed = s;
    }
    if let Some(j) = c.jobs {
        cfg.jobs = j;
    }
    if let Some(e) = c.epsilon {
        cfg.epsilon = Some(e);
        for s in &mut cfg.solvers {
            s.epsilon = None;
        }
    }
    cfg.validate()?;
    let out = c.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
    Ok((cfg, out))
}

fn gen_data(c: &Common) -> CliResult<()> {
    let path = require_config(c)?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut spec: GenSpec = toml::from_str(&text).map_err(|e| CliError::Invalid(format!("dataset spec: {e}")))?;
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    let generated = spec.generate()?;
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into());
    let csv = out.join(format!("{stem}.csv"));
    write_generated(&csv, &generated, Some(&spec))?;
    println!("wrote {}", csv.display());
    Ok(())
}

fn experiment(c: &Common, profile: bool) -> CliResult<()> {
    let (cfg, out) = load_experiment(c)?;
    let records = run_experiment(&cfg, Fault::None)?;
    let profile = write_all(&out, &records, profile.then_some(cfg.cost))?;
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    for r in &records {
        writeln!(
            so,
            "{} {} rep{} {} iters={} phi={:.6e}{}",
            r.problem,
            r.solver,
            r.rep,
            r.status,
            r.iterations,
            r.phi_final,
            if r.error.is_empty() { String::new() } else { format!(" error: {}", r.error) }
        )?;
    }
    if let Some(p) = profile {
        for (s, name) in p.solvers.iter().enumerate() {
            writeln!(so, "profile {name}: rho(1) = {:.3}", p.rho(s, 1.0))?;
        }
    }
    writeln!(so, "results in {}", out.display())?;
    let failed = records.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} run(s) raised errors")));
    }
    Ok(())
}

fn check(c: &Common, fault: Option<FaultArg>) -> CliResult<()> {
    let fault = match fault {
        Some(FaultArg::FlipSubgradient) => Fault::FlipSubgradient,
        None => Fault::None,
    };
    let outcomes = run_checks(c.seed.unwrap_or(0), fault)?;
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    for o in &outcomes {
        println!("{o}");
    }
    println!("{} checks, {failed} failed", outcomes.len());
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::GenData(c) => gen_data(c),
        Command::Solve(c) => experiment(c, false),
        Command::Bench(c) => experiment(c, true),
        Command::Check { common, fault } => check(common, *fault),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
