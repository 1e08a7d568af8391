//! Similarity graphs and their Laplacians.
//!
//! Features are turned into a sparse kNN graph with adaptive weights: for row `i`
//! with sorted non-self distances `d(1) <= d(2) <= ...`,
//!
//! ```text
//! W_ij = max(d(k+1) - d_ij, 0) / Σ_{m=1..k} (d(k+1) - d(m))
//! ```
//!
//! so each row has exactly `k` positive weights summing to one. The symmetric
//! graph is `S = (W + Wᵀ) / 2`.
//!
//! Two cut conventions are supported:
//!
//! * ratio cut: `L = Deg - S`, scaling matrix `D = I`;
//! * normalized cut: `L = I - Deg^{-1/2} S Deg^{-1/2}`, scaling matrix `D = Deg`.
//!
//! With `f(Y) = D^{1/2} Y (Yᵀ D Y)^{-1/2}`, `tr(f(Y)ᵀ L f(Y))` is then the classical
//! `Σ_k cut(C_k)/|C_k|` or `Σ_k cut(C_k)/vol(C_k)` respectively.

use std::fmt;
use std::str::FromStr;

use crate::dataset_io::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::{ensure_symmetric, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutKind {
    Ratio,
    Normalized,
}

impl CutKind {
    pub const ALL: [CutKind; 2] = [CutKind::Ratio, CutKind::Normalized];

    pub fn as_str(self) -> &'static str {
        match self {
            CutKind::Ratio => "ratio",
            CutKind::Normalized => "normalized",
        }
    }
}

impl fmt::Display for CutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(CutKind::Ratio),
            "normalized" => Ok(CutKind::Normalized),
            other => Err(Error::contract(format!("unknown cut {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    /// Symmetric, nonnegative, zero diagonal.
    pub weights: DenseMatrix,
    /// Diagonal of the scaling matrix `D`: all ones for ratio cut, degrees for normalized cut.
    pub scaling: Vec<f64>,
    /// Row sums of `weights`.
    pub degrees: Vec<f64>,
    pub laplacian: DenseMatrix,
    pub cut: CutKind,
    pub neighbor_k: Option<usize>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }
}

/// Squared Euclidean distances between all pairs of rows.
pub fn pairwise_sq_dists(x: &DataMatrix) -> Result<DenseMatrix> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::contract("need at least two samples"));
    }
    let f = &x.features;
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let xi = f.row(i);
        for j in (i + 1)..n {
            let dist = (xi - f.row(j)).norm_squared();
            d[(i, j)] = dist;
            d[(j, i)] = dist;
        }
    }
    Ok(d)
}

/// Adaptive-neighbor weights; row `i` is supported on its `k` nearest non-self neighbors.
pub fn can_weights(dists: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let n = dists.nrows();
    if dists.ncols() != n {
        return Err(Error::contract("distance matrix must be square"));
    }
    if n < 3 || k == 0 || k > n - 2 {
        return Err(Error::contract(format!(
            "need 1 <= k <= n - 2, got k = {k}, n = {n}"
        )));
    }
    let mut w = DenseMatrix::zeros(n, n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        // Ties go to the smaller index.
        order.sort_by(|&a, &b| dists[(i, a)].total_cmp(&dists[(i, b)]).then(a.cmp(&b)));
        let cutoff = dists[(i, order[k])];
        let denom: f64 = order[..k].iter().map(|&j| cutoff - dists[(i, j)]).sum();
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(Error::DegenerateNeighborhood { row: i });
        }
        for &j in &order[..k] {
            w[(i, j)] = (cutoff - dists[(i, j)]).max(0.0) / denom;
        }
    }
    Ok(w)
}

/// kNN graph from features, symmetrized as `(W + Wᵀ) / 2`.
pub fn build_graph_from_features(x: &DataMatrix, k: usize, cut: CutKind) -> Result<Graph> {
    let dists = pairwise_sq_dists(x)?;
    let w = can_weights(&dists, k)?;
    let s = (&w + w.transpose()) * 0.5;
    let mut g = assemble(s, cut)?;
    g.neighbor_k = Some(k);
    Ok(g)
}

/// Graph from a user-supplied weight matrix.
pub fn build_graph_from_weights(s: DenseMatrix, cut: CutKind) -> Result<Graph> {
    if s.nrows() != s.ncols() {
        return Err(Error::contract(format!(
            "weight matrix must be square, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if s.nrows() < 2 {
        return Err(Error::contract("graph needs at least two vertices"));
    }
    if let Some(bad) = s.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::contract(format!(
            "weights must be finite and nonnegative, found {bad}"
        )));
    }
    ensure_symmetric(&s, 1e-12)?;
    if (0..s.nrows()).any(|i| s[(i, i)] != 0.0) {
        return Err(Error::contract("weight matrix must have a zero diagonal"));
    }
    let s = (&s + s.transpose()) * 0.5;
    assemble(s, cut)
}

fn assemble(s: DenseMatrix, cut: CutKind) -> Result<Graph> {
    let n = s.nrows();
    let degrees: Vec<f64> = (0..n).map(|i| s.row(i).sum()).collect();
    let (laplacian, scaling) = match cut {
        CutKind::Ratio => {
            let mut l = -s.clone();
            for i in 0..n {
                l[(i, i)] = degrees[i] - s[(i, i)];
            }
            (l, vec![1.0; n])
        }
        CutKind::Normalized => {
            if let Some(v) = degrees.iter().position(|&d| d <= 0.0) {
                return Err(Error::DisconnectedVertex { vertex: v });
            }
            let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
            let l = DenseMatrix::from_fn(n, n, |i, j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                delta - (inv_sqrt[i] * inv_sqrt[j]) * s[(i, j)]
            });
            (l, degrees.clone())
        }
    };
    Ok(Graph {
        weights: s,
        scaling,
        degrees,
        laplacian,
        cut,
        neighbor_k: None,
    })
}
