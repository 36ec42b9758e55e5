use std::collections::HashMap;

use crate::error::{invalid, Result};

/// Cluster ids of a dataset, each in `0..l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignments: Vec<usize>,
    l: usize,
}

impl Partition {
    pub fn new(assignments: Vec<usize>, l: usize) -> Result<Self> {
        if let Some(&bad) = assignments.iter().find(|&&a| a >= l) {
            return invalid(format!("label {bad} out of range 0..{l}"));
        }
        Ok(Partition { assignments, l })
    }

    /// Uses `max + 1` as the number of clusters.
    pub fn from_labels(assignments: Vec<usize>) -> Self {
        let l = assignments.iter().max().map_or(0, |m| m + 1);
        Partition { assignments, l }
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn num_clusters(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

struct Contingency {
    cells: HashMap<(usize, usize), usize>,
    pred: HashMap<usize, usize>,
    truth: HashMap<usize, usize>,
    n: usize,
}

fn contingency(pred: &Partition, truth: &Partition) -> Result<Contingency> {
    if pred.len() != truth.len() {
        return invalid(format!("partitions have lengths {} and {}", pred.len(), truth.len()));
    }
    let mut c = Contingency {
        cells: HashMap::new(),
        pred: HashMap::new(),
        truth: HashMap::new(),
        n: pred.len(),
    };
    for (&p, &t) in pred.assignments.iter().zip(&truth.assignments) {
        *c.cells.entry((p, t)).or_default() += 1;
        *c.pred.entry(p).or_default() += 1;
        *c.truth.entry(t).or_default() += 1;
    }
    Ok(c)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VMeasure {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

/// Entropy-based homogeneity, completeness and their harmonic mean.
///
/// A constant truth counts as perfectly homogeneous and a constant prediction
/// as perfectly complete.
///
/// ```
/// use riemsub::metrics::{homogeneity_completeness_v, Partition};
///
/// let truth = Partition::from_labels(vec![0, 0, 1, 1]);
/// let one = Partition::from_labels(vec![0, 0, 0, 0]);
/// let s = homogeneity_completeness_v(&one, &truth).unwrap();
/// assert_eq!((s.homogeneity, s.completeness, s.v_measure), (0.0, 1.0, 0.0));
/// ```
pub fn homogeneity_completeness_v(pred: &Partition, truth: &Partition) -> Result<VMeasure> {
    let c = contingency(pred, truth)?;
    if c.n == 0 {
        return invalid("empty partitions");
    }
    let n = c.n as f64;
    let h_truth = entropy(c.truth.values().copied(), n);
    let h_pred = entropy(c.pred.values().copied(), n);
    // H(truth | pred) and H(pred | truth)
    let mut h_t_given_p = 0.0;
    let mut h_p_given_t = 0.0;
    for (&(p, t), &nij) in &c.cells {
        let q = nij as f64 / n;
        h_t_given_p -= q * (nij as f64 / c.pred[&p] as f64).ln();
        h_p_given_t -= q * (nij as f64 / c.truth[&t] as f64).ln();
    }
    let homogeneity = if h_truth == 0.0 { 1.0 } else { (1.0 - h_t_given_p / h_truth).clamp(0.0, 1.0) };
    let completeness = if h_pred == 0.0 { 1.0 } else { (1.0 - h_p_given_t / h_pred).clamp(0.0, 1.0) };
    let v_measure = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Ok(VMeasure { homogeneity, completeness, v_measure })
}

fn pairs(k: usize) -> f64 {
    let k = k as f64;
    k * (k - 1.0) / 2.0
}

/// Pair-counting Rand index adjusted for chance.
///
/// Returns 1 when both partitions are trivial in the same way (the index
/// and its expectation coincide).
pub fn adjusted_rand_index(pred: &Partition, truth: &Partition) -> Result<f64> {
    let c = contingency(pred, truth)?;
    if c.n < 2 {
        return invalid("the adjusted Rand index needs at least two points");
    }
    let index: f64 = c.cells.values().map(|&v| pairs(v)).sum();
    let sum_p: f64 = c.pred.values().map(|&v| pairs(v)).sum();
    let sum_t: f64 = c.truth.values().map(|&v| pairs(v)).sum();
    let expected = sum_p * sum_t / pairs(c.n);
    let max = 0.5 * (sum_p + sum_t);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
