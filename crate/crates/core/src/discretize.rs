//! Turning a relaxed solution `F*` into hard cluster labels.
//!
//! Five methods share one entry point, [`discretize`]:
//!
//! | method        | target                                                        |
//! |---------------|---------------------------------------------------------------|
//! | `km`          | k-means on the rows of `F*`                                   |
//! | `km_norm`     | k-means on the unit-normalized rows of `F*`                   |
//! | `sr`          | `min ‖F*R − Y‖²` over rotations and plain indicators          |
//! | `isr`         | `min ‖F*R − f(Y)‖²` over rotations and scaled indicators      |
//! | `first_order` | `max tr((RᵀF*ᵀ − η RᵀF*ᵀL) f(Y))`, gradient-aware             |
//!
//! `isr` is `first_order` with `η = 0`. Both alternate a Procrustes rotation
//! step with one greedy sweep over the rows of `Y`, where each row moves to the
//! column with the largest loss gain unless that would empty its current column.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::{procrustes, DenseMatrix};
use crate::relaxed::{assignment_objective, Assignment, RelaxedSolution};

pub const DEFAULT_ETA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Km,
    KmNorm,
    Sr,
    Isr,
    FirstOrder,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Km,
        Method::KmNorm,
        Method::Sr,
        Method::Isr,
        Method::FirstOrder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Km => "km",
            Method::KmNorm => "km_norm",
            Method::Sr => "sr",
            Method::Isr => "isr",
            Method::FirstOrder => "first_order",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::contract(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizerConfig {
    pub method: Method,
    /// Gradient weight; only read by `first_order`.
    pub eta: f64,
    pub seed: u64,
    pub max_sweeps: usize,
    pub km_restarts: usize,
    pub km_max_iters: usize,
}

impl Default for DiscretizerConfig {
    fn default() -> Self {
        Self {
            method: Method::FirstOrder,
            eta: DEFAULT_ETA,
            seed: 0,
            max_sweeps: 100,
            km_restarts: 10,
            km_max_iters: 100,
        }
    }
}

impl DiscretizerConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        Self {
            method,
            seed,
            ..Self::default()
        }
    }
}

/// What one method run produced, before the cut objective is attached.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub assignment: Assignment,
    pub iterations: usize,
    pub converged: bool,
    /// Method-internal objective per iteration: k-means inertia (lower is better),
    /// `tr(RᵀF*ᵀY)` for `sr`, the rotation-coupled objective for `isr`/`first_order`
    /// (higher is better).
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DiscretizeReport {
    pub iterations: usize,
    pub converged: bool,
    /// `tr(f(Y)ᵀ L f(Y))` of the returned labels.
    pub final_objective: f64,
    pub trace: Vec<f64>,
}

pub fn discretize(
    rs: &RelaxedSolution,
    g: &Graph,
    cfg: &DiscretizerConfig,
) -> Result<(Assignment, DiscretizeReport)> {
    if rs.n() != g.n() {
        return Err(Error::LengthMismatch {
            left: rs.n(),
            right: g.n(),
        });
    }
    let c = rs.c();
    let run = match cfg.method {
        Method::Km => km_discretize(&rs.f_star, c, cfg.seed, cfg.km_restarts, cfg.km_max_iters)?,
        Method::KmNorm => {
            km_norm_discretize(&rs.f_star, c, cfg.seed, cfg.km_restarts, cfg.km_max_iters)?
        }
        Method::Sr => sr_discretize(rs, cfg.seed, cfg.max_sweeps)?,
        Method::Isr => isr_discretize(rs, g, cfg.seed, cfg.max_sweeps)?,
        Method::FirstOrder => first_order_discretize(rs, g, cfg.eta, cfg.seed, cfg.max_sweeps)?,
    };
    let final_objective = assignment_objective(&run.assignment, g)?;
    Ok((
        run.assignment,
        DiscretizeReport {
            iterations: run.iterations,
            converged: run.converged,
            final_objective,
            trace: run.trace,
        },
    ))
}

// ---------------------------------------------------------------------------
// k-means

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

struct Lloyd {
    labels: Vec<usize>,
    inertia: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn centroids(points: &[Vec<f64>], labels: &[usize], c: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; c];
    let mut counts = vec![0usize; c];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &k) in sums.iter_mut().zip(&counts) {
        if k > 0 {
            s.iter_mut().for_each(|v| *v /= k as f64);
        }
    }
    sums
}

/// Fills empty clusters by moving, one at a time, the point farthest from its centroid.
fn repair_kmeans_empties(points: &[Vec<f64>], labels: &mut [usize], centers: &mut [Vec<f64>]) {
    let c = centers.len();
    loop {
        let mut counts = vec![0usize; c];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&k| k == 0) else {
            return;
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centers[labels[i]]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("n >= c guarantees a donor cluster");
        labels[i] = empty;
        centers[empty] = points[i].clone();
    }
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, ctr) in centers.iter().enumerate() {
        let d = sq_dist(p, ctr);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn inertia(points: &[Vec<f64>], labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centers[l]))
        .sum()
}

fn lloyd(points: &[Vec<f64>], c: usize, first: usize, max_iters: usize) -> Lloyd {
    // Farthest-first seeding from a random first point.
    let mut centers = vec![points[first].clone()];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < c {
        let mut far = 0;
        for (i, &d) in min_d.iter().enumerate() {
            if d > min_d[far] {
                far = i;
            }
        }
        centers.push(points[far].clone());
        for (i, p) in points.iter().enumerate() {
            min_d[i] = min_d[i].min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    repair_kmeans_empties(points, &mut labels, &mut centers);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        centers = centroids(points, &labels, c);
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        repair_kmeans_empties(points, &mut next, &mut centers);
        let changed = next != labels;
        labels = next;
        centers = centroids(points, &labels, c);
        trace.push(inertia(points, &labels, &centers));
        if !changed {
            converged = true;
            break;
        }
    }
    let final_inertia = inertia(points, &labels, &centroids(points, &labels, c));
    Lloyd {
        labels,
        inertia: final_inertia,
        iterations,
        converged,
        trace,
    }
}

/// Best-of-`restarts` k-means on the rows of `f_star`.
pub fn km_discretize(
    f_star: &DenseMatrix,
    c: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<MethodRun> {
    let n = f_star.nrows();
    if c < 1 || n < c {
        return Err(Error::contract(format!(
            "k-means needs n >= c, got n = {n}, c = {c}"
        )));
    }
    let points = rows_of(f_star);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Lloyd> = None;
    for _ in 0..restarts.max(1) {
        let first = rng.random_range(0..n);
        let run = lloyd(&points, c, first, max_iters);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(MethodRun {
        assignment: Assignment::new(best.labels, c)?,
        iterations: best.iterations,
        converged: best.converged,
        trace: best.trace,
    })
}

/// Rows scaled to unit length; rows with norm below 1e-12 are left as they are.
pub fn normalize_rows(f_star: &DenseMatrix) -> DenseMatrix {
    let mut out = f_star.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm >= 1e-12 {
            row /= norm;
        }
    }
    out
}

pub fn km_norm_discretize(
    f_star: &DenseMatrix,
    c: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<MethodRun> {
    km_discretize(&normalize_rows(f_star), c, seed, restarts, max_iters)
}

// ---------------------------------------------------------------------------
// Rotation-based methods

/// Uniform random labels; each empty cluster then receives one random row from a
/// cluster that can spare it.
pub fn random_labels(n: usize, c: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    let mut counts = vec![0usize; c];
    for &l in &labels {
        counts[l] += 1;
    }
    for j in 0..c {
        if counts[j] > 0 {
            continue;
        }
        let donors: Vec<usize> = (0..n).filter(|&i| counts[labels[i]] > 1).collect();
        let i = donors[rng.random_range(0..donors.len())];
        counts[labels[i]] -= 1;
        labels[i] = j;
        counts[j] = 1;
    }
    labels
}

fn indicator(labels: &[usize], c: usize) -> DenseMatrix {
    let mut y = DenseMatrix::zeros(labels.len(), c);
    for (i, &l) in labels.iter().enumerate() {
        y[(i, l)] = 1.0;
    }
    y
}

fn check_sizes(rs: &RelaxedSolution) -> Result<(usize, usize)> {
    let (n, c) = (rs.n(), rs.c());
    if c < 2 || n < c {
        return Err(Error::contract(format!(
            "need n >= c >= 2, got n = {n}, c = {c}"
        )));
    }
    Ok((n, c))
}

/// Spectral rotation against plain 0/1 indicators.
pub fn sr_discretize(rs: &RelaxedSolution, seed: u64, max_sweeps: usize) -> Result<MethodRun> {
    let (n, c) = check_sizes(rs)?;
    let f = &rs.f_star;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = random_labels(n, c, &mut rng);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_sweeps {
        iterations += 1;
        let r = procrustes(&(f.transpose() * indicator(&labels, c)))?;
        let fr = f * &r;
        let mut next: Vec<usize> = (0..n)
            .map(|i| {
                let row = fr.row(i);
                let mut best = 0;
                for j in 1..c {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect();
        steal_for_empty_columns(&fr, &mut next, c);
        trace.push((0..n).map(|i| fr[(i, next[i])]).sum());
        let changed = next != labels;
        labels = next;
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(MethodRun {
        assignment: Assignment::new(labels, c)?,
        iterations,
        converged,
        trace,
    })
}

/// Each empty column takes the row that loses the least score by moving there.
fn steal_for_empty_columns(scores: &DenseMatrix, labels: &mut [usize], c: usize) {
    let mut counts = vec![0usize; c];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for j in 0..c {
        if counts[j] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] < 2 {
                continue;
            }
            let gain = scores[(i, j)] - scores[(i, l)];
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("n >= c guarantees a donor");
        counts[labels[i]] -= 1;
        labels[i] = j;
        counts[j] = 1;
    }
}

/// Greedy row-update state for `max Σ_j mass_j / √weight_j` with
/// `mass_j = Σ_k √D_k M_kj Y_kj` and `weight_j = Σ_k D_k Y_kj`.
#[derive(Debug, Clone)]
pub struct FirstOrderState {
    m: DenseMatrix,
    labels: Vec<usize>,
    scaling: Vec<f64>,
    sqrt_scaling: Vec<f64>,
    counts: Vec<usize>,
    column_mass: Vec<f64>,
    column_weight: Vec<f64>,
}

impl FirstOrderState {
    pub fn new(m: DenseMatrix, labels: Vec<usize>, scaling: &[f64]) -> Result<Self> {
        let (n, c) = m.shape();
        if labels.len() != n || scaling.len() != n {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: n,
            });
        }
        // Validates labels and non-empty columns.
        Assignment::new(labels.clone(), c)?;
        let mut state = Self {
            m,
            labels,
            scaling: scaling.to_vec(),
            sqrt_scaling: scaling.iter().map(|d| d.sqrt()).collect(),
            counts: vec![0; c],
            column_mass: vec![0.0; c],
            column_weight: vec![0.0; c],
        };
        state.refresh();
        Ok(state)
    }

    fn refresh(&mut self) {
        let (mass, weight, counts) = self.recompute();
        self.column_mass = mass;
        self.column_weight = weight;
        self.counts = counts;
    }

    fn recompute(&self) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
        let c = self.m.ncols();
        let mut mass = vec![0.0; c];
        let mut weight = vec![0.0; c];
        let mut counts = vec![0; c];
        for (i, &l) in self.labels.iter().enumerate() {
            mass[l] += self.sqrt_scaling[i] * self.m[(i, l)];
            weight[l] += self.scaling[i];
            counts[l] += 1;
        }
        (mass, weight, counts)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn column_mass(&self) -> &[f64] {
        &self.column_mass
    }

    pub fn column_weight(&self) -> &[f64] {
        &self.column_weight
    }

    /// Largest absolute gap between the cached column sums and a fresh recomputation.
    pub fn cache_drift(&self) -> f64 {
        let (mass, weight, _) = self.recompute();
        mass.iter()
            .zip(&self.column_mass)
            .chain(weight.iter().zip(&self.column_weight))
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Objective from the cached column sums.
    pub fn objective(&self) -> f64 {
        self.column_mass
            .iter()
            .zip(&self.column_weight)
            .map(|(s, w)| s / w.sqrt())
            .sum()
    }

    /// `tr(Mᵀ f(Y))` formed explicitly.
    pub fn objective_from_scratch(&self) -> f64 {
        let (mass, weight, _) = self.recompute();
        mass.iter().zip(&weight).map(|(s, w)| s / w.sqrt()).sum()
    }

    /// Change in the objective from placing row `i` in column `j`, relative to row `i`
    /// belonging to no column. A singleton column's "without" term is 0.
    pub fn loss_gain(&self, i: usize, j: usize) -> f64 {
        let mass = self.column_mass[j];
        let weight = self.column_weight[j];
        let contrib = self.sqrt_scaling[i] * self.m[(i, j)];
        if self.labels[i] == j {
            let without = if self.counts[j] == 1 {
                0.0
            } else {
                (mass - contrib) / (weight - self.scaling[i]).sqrt()
            };
            mass / weight.sqrt() - without
        } else {
            (mass + contrib) / (weight + self.scaling[i]).sqrt() - mass / weight.sqrt()
        }
    }

    /// Column with the largest loss gain for row `i`; ties go to the lowest index.
    pub fn best_column(&self, i: usize) -> usize {
        let mut best = 0;
        let mut best_gain = self.loss_gain(i, 0);
        for j in 1..self.m.ncols() {
            let gain = self.loss_gain(i, j);
            if gain > best_gain {
                best = j;
                best_gain = gain;
            }
        }
        best
    }

    fn move_row(&mut self, i: usize, to: usize) {
        let from = self.labels[i];
        let d = self.scaling[i];
        self.column_mass[from] -= self.sqrt_scaling[i] * self.m[(i, from)];
        self.column_weight[from] -= d;
        self.counts[from] -= 1;
        self.column_mass[to] += self.sqrt_scaling[i] * self.m[(i, to)];
        self.column_weight[to] += d;
        self.counts[to] += 1;
        self.labels[i] = to;
    }

    /// Updates row `i`; returns whether its label changed. A move that would leave
    /// the current column empty is rejected.
    pub fn update_row(&mut self, i: usize) -> bool {
        let current = self.labels[i];
        let target = self.best_column(i);
        if target == current || self.counts[current] == 1 {
            return false;
        }
        self.move_row(i, target);
        true
    }

    /// One ascending pass over all rows; returns whether any label changed.
    pub fn sweep(&mut self) -> bool {
        let mut changed = false;
        for i in 0..self.labels.len() {
            changed |= self.update_row(i);
        }
        changed
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }
}

/// Improved spectral rotation: the first-order method with the gradient term switched off.
pub fn isr_discretize(
    rs: &RelaxedSolution,
    g: &Graph,
    seed: u64,
    max_sweeps: usize,
) -> Result<MethodRun> {
    first_order_discretize(rs, g, 0.0, seed, max_sweeps)
}

/// Alternates `R = UVᵀ` from `SVD(F*ᵀG − ηF*ᵀLG)` with a greedy sweep over rows of `Y`
/// against `M = (F* − ηLF*)R`, until a sweep changes nothing.
///
/// The trace records `tr(Mᵀ f(Y))` after the first rotation step and after each
/// sweep; it is non-decreasing.
pub fn first_order_discretize(
    rs: &RelaxedSolution,
    g: &Graph,
    eta: f64,
    seed: u64,
    max_sweeps: usize,
) -> Result<MethodRun> {
    let (n, c) = check_sizes(rs)?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::contract(format!(
            "eta must be finite and nonnegative, got {eta}"
        )));
    }
    if g.n() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: g.n(),
        });
    }
    let f = &rs.f_star;
    let coupled = if eta == 0.0 {
        f.clone()
    } else {
        f - (&g.laplacian * f) * eta
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = random_labels(n, c, &mut rng);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_sweeps {
        iterations += 1;
        let gmat = scaled_indicator_raw(&labels, c, &g.scaling);
        let r = procrustes(&(coupled.transpose() * gmat))?;
        let mut state = FirstOrderState::new(&coupled * r, labels, &g.scaling)?;
        if trace.is_empty() {
            trace.push(state.objective_from_scratch());
        }
        let changed = state.sweep();
        trace.push(state.objective_from_scratch());
        labels = state.into_labels();
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(MethodRun {
        assignment: Assignment::new(labels, c)?,
        iterations,
        converged,
        trace,
    })
}

fn scaled_indicator_raw(labels: &[usize], c: usize, scaling: &[f64]) -> DenseMatrix {
    let w = crate::relaxed::cluster_weights(labels, c, scaling);
    let mut out = DenseMatrix::zeros(labels.len(), c);
    for (i, &l) in labels.iter().enumerate() {
        out[(i, l)] = (scaling[i] / w[l]).sqrt();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::gen_blobs;
    use crate::fixtures::four_node_weights;
    use crate::graph::{build_graph_from_features, build_graph_from_weights, CutKind};
    use crate::relaxed::{scaled_indicator, solve_relaxed};
    use approx::assert_abs_diff_eq;

    fn four_node() -> (Graph, RelaxedSolution) {
        let g = build_graph_from_weights(four_node_weights(), CutKind::Ratio).unwrap();
        let rs = solve_relaxed(&g, 2).unwrap();
        (g, rs)
    }

    fn two_components() -> (Graph, RelaxedSolution) {
        let mut s = DenseMatrix::zeros(8, 8);
        for (a, b, w) in [
            (0, 1, 0.9),
            (1, 2, 0.6),
            (2, 3, 0.8),
            (0, 3, 0.3),
            (4, 5, 0.7),
            (5, 6, 0.5),
            (6, 7, 0.9),
            (4, 7, 0.4),
        ] {
            s[(a, b)] = w;
            s[(b, a)] = w;
        }
        let g = build_graph_from_weights(s, CutKind::Ratio).unwrap();
        let rs = solve_relaxed(&g, 2).unwrap();
        (g, rs)
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("kmeans".parse::<Method>().is_err());
    }

    #[test]
    fn loss_gain_hand_example() {
        let state =
            FirstOrderState::new(DenseMatrix::identity(2, 2), vec![0, 1], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(state.loss_gain(0, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            state.loss_gain(0, 1),
            std::f64::consts::FRAC_1_SQRT_2 - 1.0,
            epsilon = 1e-15
        );
        assert_eq!(state.best_column(0), 0);
    }

    #[test]
    fn loss_gain_ties_pick_lowest_column() {
        let m = DenseMatrix::from_fn(6, 3, |i, j| match (i, j) {
            (0, 2) => 0.0,
            (0, _) => 1.0,
            _ => 0.4,
        });
        let state = FirstOrderState::new(m, vec![2, 2, 0, 0, 1, 1], &[1.0; 6]).unwrap();
        // Row 0 sits in column 2; columns 0 and 1 are symmetric and both beat staying.
        assert_eq!(state.loss_gain(0, 0), state.loss_gain(0, 1));
        assert_eq!(state.best_column(0), 0);
    }

    #[test]
    fn loss_gain_replays_objective_changes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 12;
        let c = 3;
        let m = DenseMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0));
        let scaling: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let labels = random_labels(n, c, &mut rng);
        let state = FirstOrderState::new(m, labels, &scaling).unwrap();
        let before = state.objective_from_scratch();
        for i in 0..n {
            let from = state.labels()[i];
            if state.counts[from] == 1 {
                continue;
            }
            for j in 0..c {
                let mut moved = state.clone();
                moved.move_row(i, j);
                let predicted = before - state.loss_gain(i, from) + state.loss_gain(i, j);
                assert!((moved.objective_from_scratch() - predicted).abs() <= 1e-9);
                // Moving back restores the original value.
                moved.move_row(i, from);
                assert!((moved.objective_from_scratch() - before).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn singleton_rows_never_move() {
        let m = DenseMatrix::from_row_slice(3, 2, &[0.0, 5.0, 1.0, 0.0, 1.0, 0.0]);
        let mut state = FirstOrderState::new(m, vec![0, 1, 1], &[1.0; 3]).unwrap();
        state.sweep();
        assert!(state.labels().contains(&0));
        assert!(state.labels().contains(&1));
    }

    #[test]
    fn isr_recovers_closest_partition_on_four_nodes() {
        // Node 3 is the outlier of F*, so it is split off; cut = 1/3 + 1.
        let (g, rs) = four_node();
        for seed in 0..20 {
            let cfg = DiscretizerConfig::new(Method::Isr, seed);
            let (y, report) = discretize(&rs, &g, &cfg).unwrap();
            assert_eq!(y.canonical(), vec![0, 0, 1, 0], "seed {seed}");
            assert_abs_diff_eq!(report.final_objective, 4.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn first_order_not_worse_than_isr_on_four_nodes() {
        let (g, rs) = four_node();
        for eta in [1e-3, 1e-2, 1e-1] {
            for seed in 0..10 {
                let mut cfg = DiscretizerConfig::new(Method::FirstOrder, seed);
                cfg.eta = eta;
                let (_, fo) = discretize(&rs, &g, &cfg).unwrap();
                assert!(fo.final_objective <= 4.0 / 3.0 + 1e-9);
                assert!(fo.final_objective >= 1.3 - 1e-9);
            }
        }
    }

    #[test]
    fn separable_graph_gives_zero_cut_for_every_method() {
        let (g, rs) = two_components();
        for m in Method::ALL {
            for seed in 0..5 {
                let (_, rep) = discretize(&rs, &g, &DiscretizerConfig::new(m, seed)).unwrap();
                assert!(
                    rep.final_objective <= 1e-6,
                    "{m} seed {seed}: {}",
                    rep.final_objective
                );
            }
        }
    }

    #[test]
    fn eta_zero_matches_isr_trajectory() {
        let x = gen_blobs(60, 3, 2, 1.0, 4).unwrap();
        let g = build_graph_from_features(&x, 6, CutKind::Normalized).unwrap();
        let rs = solve_relaxed(&g, 3).unwrap();
        for seed in 0..5 {
            let a = isr_discretize(&rs, &g, seed, 100).unwrap();
            let b = first_order_discretize(&rs, &g, 0.0, seed, 100).unwrap();
            assert_eq!(a.assignment, b.assignment);
            assert_eq!(a.trace, b.trace);
        }
    }

    #[test]
    fn first_order_trace_is_monotone_and_cache_consistent() {
        let x = gen_blobs(120, 4, 3, 1.5, 9).unwrap();
        for cut in CutKind::ALL {
            let g = build_graph_from_features(&x, 8, cut).unwrap();
            let rs = solve_relaxed(&g, 4).unwrap();
            for eta in [0.0, 1e-3, 1e-1, 1.0, 10.0] {
                let run = first_order_discretize(&rs, &g, eta, 3, 100).unwrap();
                for w in run.trace.windows(2) {
                    assert!(w[1] >= w[0] - 1e-10, "{cut} eta {eta}: {:?}", run.trace);
                }
                assert_eq!(
                    run.assignment.counts().iter().filter(|&&k| k == 0).count(),
                    0
                );
            }

            // Cached sums agree with recomputation after a sweep.
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let labels = random_labels(rs.n(), 4, &mut rng);
            let gm = scaled_indicator(&Assignment::new(labels.clone(), 4).unwrap(), &g).unwrap();
            let r = procrustes(&(rs.f_star.transpose() * gm)).unwrap();
            let mut state = FirstOrderState::new(&rs.f_star * r, labels, &g.scaling).unwrap();
            state.sweep();
            assert!(state.cache_drift() <= 1e-9);
            assert!((state.objective() - state.objective_from_scratch()).abs() <= 1e-9);
        }
    }

    #[test]
    fn rotation_invariance_of_rotation_methods() {
        let x = gen_blobs(50, 3, 2, 1.2, 13).unwrap();
        let g = build_graph_from_features(&x, 6, CutKind::Ratio).unwrap();
        let rs = solve_relaxed(&g, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = DenseMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0))
            .qr()
            .q();
        let mut rotated = rs.clone();
        rotated.f_star = &rs.f_star * q;
        for m in [Method::Sr, Method::Isr, Method::FirstOrder] {
            for seed in 0..5 {
                let cfg = DiscretizerConfig::new(m, seed);
                let (_, a) = discretize(&rs, &g, &cfg).unwrap();
                let (_, b) = discretize(&rotated, &g, &cfg).unwrap();
                assert!((a.final_objective - b.final_objective).abs() <= 1e-8, "{m}");
            }
        }
    }

    #[test]
    fn kmeans_groups_separated_rows() {
        let f = DenseMatrix::from_row_slice(
            6,
            2,
            &[
                0.0, 0.0, 0.01, 0.0, 5.0, 5.0, 5.0, 5.01, -4.0, 3.0, -4.01, 3.0,
            ],
        );
        let run = km_discretize(&f, 3, 7, 10, 100).unwrap();
        let l = run.assignment.canonical();
        assert_eq!(l, vec![0, 0, 1, 1, 2, 2]);
        let again = km_discretize(&f, 3, 7, 10, 100).unwrap();
        assert_eq!(run.assignment, again.assignment);
    }

    #[test]
    fn kmeans_repairs_empty_clusters_on_duplicates() {
        let f = DenseMatrix::from_row_slice(4, 1, &[1.0, 1.0, 1.0, 1.0]);
        let run = km_discretize(&f, 3, 0, 3, 10).unwrap();
        assert!(run.assignment.counts().iter().all(|&k| k > 0));
    }

    /// k-means objective `‖F − P F‖²` with cluster means as centroids.
    fn kmeans_cost(f: &DenseMatrix, labels: &[usize], c: usize) -> f64 {
        let points = rows_of(f);
        let ctr = centroids(&points, labels, c);
        inertia(&points, labels, &ctr)
    }

    #[test]
    fn kmeans_finds_global_optimum_on_tiny_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 8;
        let f = DenseMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        // Exhaustive oracle over all 2-colorings with both colors used.
        let mut optimum = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            optimum = optimum.min(kmeans_cost(&f, &labels, 2));
        }
        let hits = (0..50)
            .filter(|&seed| {
                let run = km_discretize(&f, 2, seed, 10, 100).unwrap();
                kmeans_cost(&f, run.assignment.labels(), 2) <= optimum + 1e-12
            })
            .count();
        assert!(hits >= 45, "{hits}/50");
    }

    #[test]
    fn km_norm_behaviour() {
        let f = DenseMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.6, 0.8, -0.8, 0.6]);
        let a = km_discretize(&f, 2, 5, 10, 100).unwrap();
        let b = km_norm_discretize(&f, 2, 5, 10, 100).unwrap();
        assert_eq!(a.assignment, b.assignment);

        // Points on two rays collapse to two directions.
        let rays = DenseMatrix::from_row_slice(4, 2, &[1.0, 1.0, 3.0, 3.0, -2.0, 1.0, -6.0, 3.0]);
        let normed = normalize_rows(&rays);
        assert!((normed.row(0) - normed.row(1)).norm() < 1e-12);
        assert!((normed.row(2) - normed.row(3)).norm() < 1e-12);
        let run = km_norm_discretize(&rays, 2, 1, 10, 100).unwrap();
        assert_eq!(run.assignment.canonical(), vec![0, 0, 1, 1]);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r = DenseMatrix::from_fn(20, 3, |_, _| rng.random_range(-1.0..1.0));
        r.row_mut(4).fill(0.0);
        let normed = normalize_rows(&r);
        for i in 0..20 {
            if i == 4 {
                assert_eq!(normed.row(i).norm(), 0.0);
            } else {
                assert!((normed.row(i).norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sr_fixed_point_and_lower_bound() {
        let (g, rs) = four_node();
        for seed in 0..10 {
            let run = sr_discretize(&rs, seed, 100).unwrap();
            let obj = assignment_objective(&run.assignment, &g).unwrap();
            assert!(obj >= 1.3 - 1e-9);
            let again = sr_discretize(&rs, seed, 100).unwrap();
            assert_eq!(run.assignment, again.assignment);
        }

        // F* equal to an indicator scaled by a rotation-free factor is recovered exactly.
        let labels = vec![0, 0, 1, 1, 1, 2];
        let y = Assignment::new(labels.clone(), 3).unwrap();
        let mut f = indicator(&labels, 3);
        for (j, &k) in y.counts().iter().enumerate() {
            f.column_mut(j).scale_mut(1.0 / (k as f64).sqrt());
        }
        let mut fake = rs.clone();
        fake.f_star = f;
        let run = sr_discretize(&fake, 4, 100).unwrap();
        assert!(run.assignment.same_partition(&y));
    }

    #[test]
    fn isr_beats_random_labelings() {
        let x = gen_blobs(40, 3, 2, 1.5, 17).unwrap();
        let g = build_graph_from_features(&x, 6, CutKind::Ratio).unwrap();
        let rs = solve_relaxed(&g, 3).unwrap();
        let run = isr_discretize(&rs, &g, 0, 100).unwrap();
        let j_isr = |y: &Assignment| crate::theory::j_isr(&rs.f_star, y, &g).unwrap();
        let found = j_isr(&run.assignment);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let y = Assignment::new(random_labels(40, 3, &mut rng), 3).unwrap();
            assert!(found <= j_isr(&y) + 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let x = gen_blobs(60, 3, 2, 1.0, 2).unwrap();
        let g = build_graph_from_features(&x, 6, CutKind::Ratio).unwrap();
        let rs = solve_relaxed(&g, 3).unwrap();
        for m in Method::ALL {
            let cfg = DiscretizerConfig::new(m, 11);
            let (a, ra) = discretize(&rs, &g, &cfg).unwrap();
            let (b, rb) = discretize(&rs, &g, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(ra.trace, rb.trace);
            assert_abs_diff_eq!(
                ra.final_objective,
                crate::relaxed::assignment_objective(&a, &g).unwrap(),
                epsilon = 1e-9
            );
        }
    }
}
