//! Clustering accuracy under optimal label matching, and normalized mutual information.
//!
//! Labels may be arbitrary integers; they are compressed to dense ids in order of
//! first appearance of each distinct value (sorted), so neither metric depends on
//! the label values themselves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Contingency {
    /// `counts[a][b]`: samples with true class `a` and predicted cluster `b`.
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl Contingency {
    pub fn new(true_labels: &[usize], pred_labels: &[usize]) -> Result<Self> {
        if true_labels.len() != pred_labels.len() {
            return Err(Error::LengthMismatch {
                left: true_labels.len(),
                right: pred_labels.len(),
            });
        }
        let (t, ct) = dense_ids(true_labels);
        let (p, cp) = dense_ids(pred_labels);
        let mut counts = vec![vec![0usize; cp]; ct];
        for (&a, &b) in t.iter().zip(&p) {
            counts[a][b] += 1;
        }
        Ok(Self {
            counts,
            n: true_labels.len(),
        })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn clusters(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.clusters())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ids = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect();
    (ids, distinct.len())
}

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting paths
/// with potentials). Returns `assign[row] = col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays, column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if col_row[j] > 0 {
            assign[col_row[j] - 1] = j - 1;
        }
    }
    assign
}

/// Largest number of samples covered by a one-to-one class/cluster matching.
pub fn matched_count(table: &Contingency) -> usize {
    let size = table.classes().max(table.clusters());
    let at = |a: usize, b: usize| {
        table
            .counts
            .get(a)
            .and_then(|r| r.get(b))
            .copied()
            .unwrap_or(0)
    };
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|a| (0..size).map(|b| -(at(a, b) as f64)).collect())
        .collect();
    hungarian(&cost)
        .iter()
        .enumerate()
        .map(|(a, &b)| at(a, b))
        .sum()
}

fn check_guard(table: &Contingency) -> Result<()> {
    if table.clusters() > 2 * table.classes().max(1) {
        return Err(Error::contract(format!(
            "{} predicted clusters for {} true classes",
            table.clusters(),
            table.classes()
        )));
    }
    Ok(())
}

/// Fraction of samples matched under the best one-to-one cluster-to-class mapping.
pub fn accuracy(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64> {
    let table = Contingency::new(true_labels, pred_labels)?;
    check_guard(&table)?;
    if table.n == 0 {
        return Err(Error::contract("accuracy of an empty labeling"));
    }
    Ok(matched_count(&table) as f64 / table.n as f64)
}

fn entropy(sums: &[usize], n: f64) -> f64 {
    sums.iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn nmi_of(table: &Contingency) -> f64 {
    let n = table.n as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let hu = entropy(&rows, n);
    let hv = entropy(&cols, n);
    if hu == 0.0 || hv == 0.0 {
        // Identical partitions have one nonzero per row and per column.
        let identical = table.classes() == table.clusters()
            && table
                .counts
                .iter()
                .all(|r| r.iter().filter(|&&k| k > 0).count() == 1);
        return if identical { 1.0 } else { 0.0 };
    }
    let mut mi = 0.0;
    for (a, row) in table.counts.iter().enumerate() {
        for (b, &k) in row.iter().enumerate() {
            if k > 0 {
                let k = k as f64;
                mi += k / n * (k * n / (rows[a] as f64 * cols[b] as f64)).ln();
            }
        }
    }
    (mi / (hu * hv).sqrt()).clamp(0.0, 1.0)
}

/// `I(U;V) / √(H(U)·H(V))` with natural logarithms.
pub fn nmi(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64> {
    let table = Contingency::new(true_labels, pred_labels)?;
    if table.n == 0 {
        return Err(Error::contract("nmi of an empty labeling"));
    }
    Ok(nmi_of(&table))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub acc: f64,
    pub nmi: f64,
    pub contingency: Contingency,
}

/// Both metrics for a clustering that was asked for `c` clusters. A prediction using
/// fewer than `c` distinct clusters is reported as [`Error::DegeneratePartition`].
pub fn evaluate(true_labels: &[usize], pred_labels: &[usize], c: usize) -> Result<EvalResult> {
    let table = Contingency::new(true_labels, pred_labels)?;
    if table.n == 0 {
        return Err(Error::contract("evaluation of an empty labeling"));
    }
    if table.clusters() < c {
        return Err(Error::DegeneratePartition {
            found: table.clusters(),
            expected: c,
        });
    }
    check_guard(&table)?;
    Ok(EvalResult {
        acc: matched_count(&table) as f64 / table.n as f64,
        nmi: nmi_of(&table),
        contingency: table,
    })
}
