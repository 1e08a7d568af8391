//! Relaxed eigenvector solution, scaled cluster indicators and the graph-cut objective.

use crate::error::{Error, Result};
use crate::graph::{CutKind, Graph};
use crate::numerics::{sym_eig, DenseMatrix, EigenDecomposition};

/// Hard cluster labels; every one of the `c` clusters holds at least one sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    labels: Vec<usize>,
    c: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::contract("cluster count must be positive"));
        }
        let mut counts = vec![0usize; c];
        for &l in &labels {
            if l >= c {
                return Err(Error::contract(format!(
                    "label {l} out of range for c = {c}"
                )));
            }
            counts[l] += 1;
        }
        if let Some(empty) = counts.iter().position(|&k| k == 0) {
            return Err(Error::EmptyCluster { cluster: empty });
        }
        Ok(Self { labels, c })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.c];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Relabels clusters in order of first appearance, so equal set partitions compare equal.
    pub fn canonical(&self) -> Vec<usize> {
        canonical_labels(&self.labels)
    }

    pub fn same_partition(&self, other: &Assignment) -> bool {
        self.canonical() == other.canonical()
    }
}

pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    /// Bottom-`c` eigenvectors of the Laplacian, `n x c`.
    pub f_star: DenseMatrix,
    /// Full ascending spectrum of the Laplacian.
    pub eigenvalues: Vec<f64>,
    /// All eigenvectors, column `j` paired with `eigenvalues[j]`.
    pub eigenvectors: DenseMatrix,
    pub cut: CutKind,
}

impl RelaxedSolution {
    pub fn c(&self) -> usize {
        self.f_star.ncols()
    }

    pub fn n(&self) -> usize {
        self.f_star.nrows()
    }

    /// `tr(F*ᵀ L F*)`, the relaxation lower bound.
    pub fn lower_bound(&self) -> f64 {
        self.eigenvalues[..self.c()].iter().sum()
    }

    /// Builds a solution from an existing decomposition of the graph's Laplacian.
    pub fn from_decomposition(eig: EigenDecomposition, c: usize, cut: CutKind) -> Result<Self> {
        let n = eig.eigenvalues.len();
        if c < 2 || c >= n {
            return Err(Error::contract(format!(
                "need 2 <= c <= n - 1, got c = {c}, n = {n}"
            )));
        }
        Ok(Self {
            f_star: eig.eigenvectors.columns(0, c).into_owned(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            cut,
        })
    }
}

pub fn solve_relaxed(g: &Graph, c: usize) -> Result<RelaxedSolution> {
    let n = g.n();
    if c < 2 || c >= n {
        return Err(Error::contract(format!(
            "need 2 <= c <= n - 1, got c = {c}, n = {n}"
        )));
    }
    RelaxedSolution::from_decomposition(sym_eig(&g.laplacian)?, c, g.cut)
}

/// Sum of the scaling weights per cluster, `y_jᵀ D y_j`.
pub(crate) fn cluster_weights(labels: &[usize], c: usize, scaling: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; c];
    for (i, &l) in labels.iter().enumerate() {
        w[l] += scaling[i];
    }
    w
}

/// `G = D^{1/2} Y (Yᵀ D Y)^{-1/2}`; one nonzero per row and orthonormal columns.
pub fn scaled_indicator(y: &Assignment, g: &Graph) -> Result<DenseMatrix> {
    if y.n() != g.n() {
        return Err(Error::LengthMismatch {
            left: y.n(),
            right: g.n(),
        });
    }
    let w = cluster_weights(y.labels(), y.c(), &g.scaling);
    let mut out = DenseMatrix::zeros(y.n(), y.c());
    for (i, &l) in y.labels().iter().enumerate() {
        out[(i, l)] = (g.scaling[i] / w[l]).sqrt();
    }
    Ok(out)
}

/// `tr(Gᵀ L G)`.
pub fn cut_objective(gmat: &DenseMatrix, g: &Graph) -> Result<f64> {
    if gmat.nrows() != g.n() {
        return Err(Error::LengthMismatch {
            left: gmat.nrows(),
            right: g.n(),
        });
    }
    let lg = &g.laplacian * gmat;
    Ok(crate::numerics::trace_product(gmat, &lg))
}

/// `tr(f(Y)ᵀ L f(Y))` evaluated directly from labels in O(n²).
pub fn assignment_objective(y: &Assignment, g: &Graph) -> Result<f64> {
    if y.n() != g.n() {
        return Err(Error::LengthMismatch {
            left: y.n(),
            right: g.n(),
        });
    }
    let labels = y.labels();
    let w = cluster_weights(labels, y.c(), &g.scaling);
    let sqrt_d: Vec<f64> = g.scaling.iter().map(|d| d.sqrt()).collect();
    let mut per_cluster = vec![0.0; y.c()];
    for a in 0..y.n() {
        let la = labels[a];
        let row = g.laplacian.row(a);
        let mut acc = 0.0;
        for b in 0..y.n() {
            if labels[b] == la {
                acc += row[b] * sqrt_d[b];
            }
        }
        per_cluster[la] += acc * sqrt_d[a];
    }
    Ok(per_cluster.iter().zip(&w).map(|(s, wj)| s / wj).sum())
}
