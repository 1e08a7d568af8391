//! Exhaustive ground truth for tiny graphs.
//!
//! Set partitions of `n` items into exactly `c` blocks are enumerated as
//! restricted growth strings (`a_0 = 0`, `a_i <= max(a_0..a_{i-1}) + 1`), which is
//! also the first-occurrence canonical labeling. Strings come out in
//! lexicographic order, so "first strict minimum" is the lexicographically
//! smallest minimizer.

use crate::dataset_io::{gen_random_graph, RandomGraphSpec};
use crate::error::{Error, Result};
use crate::graph::{build_graph_from_weights, CutKind, Graph};
use crate::numerics::procrustes;
use crate::relaxed::{
    assignment_objective, scaled_indicator, solve_relaxed, Assignment, RelaxedSolution,
};
use crate::seeding::derive_seed_u64;

pub const MAX_ORACLE_N: usize = 16;

/// Lexicographic stream of all partitions of `n` items into `c` non-empty blocks.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<usize>,
    c: usize,
    done: bool,
}

impl Partitions {
    fn fill_tail(labels: &mut [usize], from: usize, max_so_far: usize, c: usize) {
        let n = labels.len();
        let missing = c - 1 - max_so_far;
        for (j, slot) in labels.iter_mut().enumerate().skip(from) {
            let tail_pos = n - j;
            *slot = if tail_pos <= missing { c - tail_pos } else { 0 };
        }
    }

    fn advance(&mut self) -> bool {
        let n = self.labels.len();
        let mut prefix_max = vec![0usize; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.labels[i - 1]);
        }
        for i in (1..n).rev() {
            let bumped = self.labels[i] + 1;
            if bumped > prefix_max[i] + 1 || bumped >= self.c {
                continue;
            }
            let new_max = prefix_max[i].max(bumped);
            if self.c - 1 - new_max > n - 1 - i {
                continue;
            }
            self.labels[i] = bumped;
            Self::fill_tail(&mut self.labels, i + 1, new_max, self.c);
            return true;
        }
        false
    }
}

impl Iterator for Partitions {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.done {
            return None;
        }
        let current = Assignment::new(self.labels.clone(), self.c).expect("valid partition");
        if !self.advance() {
            self.done = true;
        }
        Some(current)
    }
}

pub fn enumerate_assignments(n: usize, c: usize) -> Result<Partitions> {
    if n > MAX_ORACLE_N {
        return Err(Error::SizeGuard {
            n,
            max: MAX_ORACLE_N,
        });
    }
    if c == 0 || c > n {
        return Err(Error::contract(format!(
            "need 1 <= c <= n, got c = {c}, n = {n}"
        )));
    }
    let mut labels = vec![0; n];
    Partitions::fill_tail(&mut labels, 1, 0, c);
    Ok(Partitions {
        labels,
        c,
        done: false,
    })
}

/// Stirling number of the second kind via `S(n, k) = k S(n-1, k) + S(n-1, k-1)`.
pub fn stirling2(n: usize, k: usize) -> u64 {
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as u64 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

#[derive(Debug, Clone)]
pub struct Optimum {
    pub labels: Assignment,
    pub value: f64,
    pub feasible_count: u64,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Minimizer of the cut objective.
    pub best_labels: Assignment,
    pub best_value: f64,
    /// Minimizer of `min_R ‖f(Y) − F*R‖²`.
    pub closest_labels: Assignment,
    /// The squared distance at the closest partition.
    pub closest_value: f64,
    /// Cut objective of the closest partition.
    pub closest_objective: f64,
    pub feasible_count: u64,
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_ORACLE_N {
        Err(Error::SizeGuard {
            n,
            max: MAX_ORACLE_N,
        })
    } else {
        Ok(())
    }
}

pub fn brute_force_optimum(g: &Graph, c: usize) -> Result<Optimum> {
    guard(g.n())?;
    let mut best: Option<(Assignment, f64)> = None;
    let mut count = 0;
    for y in enumerate_assignments(g.n(), c)? {
        count += 1;
        let v = assignment_objective(&y, g)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((y, v));
        }
    }
    let (labels, value) = best.expect("at least one partition");
    Ok(Optimum {
        labels,
        value,
        feasible_count: count,
    })
}

/// `min_R ‖f(Y) − F*R‖²` for one labeling.
pub fn rotation_distance(rs: &RelaxedSolution, y: &Assignment, g: &Graph) -> Result<f64> {
    let gm = scaled_indicator(y, g)?;
    let r = procrustes(&(rs.f_star.transpose() * &gm))?;
    Ok((gm - &rs.f_star * r).norm_squared())
}

pub fn closest_discrete(rs: &RelaxedSolution, g: &Graph, c: usize) -> Result<Optimum> {
    guard(g.n())?;
    if rs.c() != c || rs.n() != g.n() {
        return Err(Error::contract(
            "relaxed solution does not match graph and c",
        ));
    }
    let mut best: Option<(Assignment, f64)> = None;
    let mut count = 0;
    for y in enumerate_assignments(g.n(), c)? {
        count += 1;
        let v = rotation_distance(rs, &y, g)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((y, v));
        }
    }
    let (labels, value) = best.expect("at least one partition");
    Ok(Optimum {
        labels,
        value,
        feasible_count: count,
    })
}

pub fn solve_oracle(rs: &RelaxedSolution, g: &Graph, c: usize) -> Result<OracleResult> {
    let best = brute_force_optimum(g, c)?;
    let closest = closest_discrete(rs, g, c)?;
    let closest_objective = assignment_objective(&closest.labels, g)?;
    Ok(OracleResult {
        best_labels: best.labels,
        best_value: best.value,
        closest_labels: closest.labels,
        closest_value: closest.value,
        closest_objective,
        feasible_count: best.feasible_count,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MismatchRow {
    pub n: usize,
    pub trials: usize,
    pub mismatches: usize,
    pub proportion: f64,
}

/// Fraction of random graphs whose cut optimum and Euclidean-closest partition differ.
pub fn mismatch_study(
    n_values: &[usize],
    trials: usize,
    c: usize,
    seed: u64,
) -> Result<Vec<MismatchRow>> {
    if trials == 0 {
        return Err(Error::EmptyReport("trials must be positive".into()));
    }
    if n_values.is_empty() {
        return Err(Error::EmptyReport("no graph sizes requested".into()));
    }
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        guard(n)?;
        if c < 2 || c >= n {
            return Err(Error::contract(format!(
                "need 2 <= c <= n - 1, got c = {c}, n = {n}"
            )));
        }
        let mut mismatches = 0;
        for trial in 0..trials {
            let spec = RandomGraphSpec {
                n,
                seed: derive_seed_u64(&[seed, n as u64, trial as u64]),
            };
            let g = build_graph_from_weights(gen_random_graph(&spec)?, CutKind::Ratio)?;
            let rs = solve_relaxed(&g, c)?;
            let result = solve_oracle(&rs, &g, c)?;
            if !result.best_labels.same_partition(&result.closest_labels) {
                mismatches += 1;
            }
        }
        rows.push(MismatchRow {
            n,
            trials,
            mismatches,
            proportion: mismatches as f64 / trials as f64,
        });
    }
    Ok(rows)
}
