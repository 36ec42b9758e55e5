use std::io::Write;

use crate::error::{dimension, invalid, Result};

/// Costs of every solver on every problem; `None` marks a failed run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    /// `costs[s][q]` for solver `s` on problem `q`.
    pub costs: Vec<Vec<Option<f64>>>,
}

impl ProfileTable {
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() || self.problems.is_empty() {
            return invalid("performance profile of an empty table");
        }
        if self.costs.len() != self.solvers.len() || self.costs.iter().any(|r| r.len() != self.problems.len()) {
            return dimension(format!(
                "cost table must be {} x {}",
                self.solvers.len(),
                self.problems.len()
            ));
        }
        for c in self.costs.iter().flatten().flatten() {
            if !(*c > 0.0 && c.is_finite()) {
                return invalid(format!("costs must be positive and finite, got {c}"));
            }
        }
        Ok(())
    }
}

/// Cost ratios `r = cost / best cost` per solver and retained problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub solvers: Vec<String>,
    /// Problems kept: those solved by at least one solver.
    pub problems: Vec<String>,
    /// `ratios[s][q]`, `+∞` for failures.
    pub ratios: Vec<Vec<f64>>,
}

impl Profile {
    /// Fraction of retained problems solver `s` solves within `tau` times
    /// the best cost.
    pub fn rho(&self, s: usize, tau: f64) -> f64 {
        let r = &self.ratios[s];
        if r.is_empty() {
            return 0.0;
        }
        r.iter().filter(|&&v| v <= tau).count() as f64 / r.len() as f64
    }

    /// Distinct finite ratios in increasing order; 1 is always included.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut taus: Vec<f64> = self.ratios.iter().flatten().copied().filter(|v| v.is_finite()).collect();
        taus.push(1.0);
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        taus
    }

    /// Comma-separated rows `tau, ρ_1(tau), …` at every breakpoint.
    pub fn write_delimited<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "tau")?;
        for s in &self.solvers {
            write!(out, ",{s}")?;
        }
        writeln!(out)?;
        for tau in self.breakpoints() {
            write!(out, "{tau}")?;
            for s in 0..self.solvers.len() {
                write!(out, ",{}", self.rho(s, tau))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Builds the profile, dropping problems no solver finished.
pub fn performance_profile(table: &ProfileTable) -> Result<Profile> {
    table.validate()?;
    let mut problems = Vec::new();
    let mut ratios = vec![Vec::new(); table.solvers.len()];
    for (q, name) in table.problems.iter().enumerate() {
        let best = table
            .costs
            .iter()
            .filter_map(|row| row[q])
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            continue;
        }
        problems.push(name.clone());
        for (s, row) in table.costs.iter().enumerate() {
            ratios[s].push(row[q].map_or(f64::INFINITY, |c| c / best));
        }
    }
    Ok(Profile {
        solvers: table.solvers.clone(),
        problems,
        ratios,
    })
}
