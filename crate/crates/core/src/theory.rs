//! Numerical checks of the inequalities linking k-means, spectral rotation and the cut.
//!
//! For ratio cut, with `σ_i` the singular values of `(YᵀY)^{-1/2} Yᵀ F*`:
//!
//! ```text
//! J_kmeans(Y) = c − Σ σ_i²
//! J_isr(Y)    = 2c − 2 Σ σ_i          (so J_isr − J_kmeans = Σ (1 − σ_i)²)
//! J_kmeans(Y) <= J_isr(Y) <= (1 + ε) J_kmeans(Y),
//!     ε = ε_var + 2 √ε_var,  ε_var = max_i (1 − σ_i) / (1 + σ_i)
//! ```
//!
//! For a residual `Δ = f(Y) − F*R` and `ρ(Δ) = ‖F_⊥ᵀ Δ‖` (projection onto the
//! eigenvectors with nonzero eigenvalue), `λ_min ρ² <= tr(ΔᵀLΔ) <= λ_max ρ²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset_io::{gen_random_graph, RandomGraphSpec};
use crate::discretize::{km_discretize, random_labels};
use crate::error::{Error, Result};
use crate::graph::{build_graph_from_weights, CutKind, Graph};
use crate::numerics::{procrustes, singular_values, DenseMatrix};
use crate::relaxed::{
    cluster_weights, scaled_indicator, solve_relaxed, Assignment, RelaxedSolution,
};
use crate::seeding::derive_seed_u64;

/// Relative slack for the sandwich and ρ inequalities.
pub const REL_TOL: f64 = 1e-8;
const ABS_FLOOR: f64 = 1e-14;
/// Eigenvalues below this fraction of the largest are treated as zero.
pub const ZERO_EIGEN_FRACTION: f64 = 1e-9;

fn check_dims(f_star: &DenseMatrix, y: &Assignment) -> Result<()> {
    if f_star.nrows() != y.n() || f_star.ncols() != y.c() {
        return Err(Error::contract(format!(
            "F* is {}x{} but the assignment has n = {}, c = {}",
            f_star.nrows(),
            f_star.ncols(),
            y.n(),
            y.c()
        )));
    }
    Ok(())
}

/// `‖F* − Y(YᵀY)⁻¹YᵀF*‖²`: squared distance of each row to its cluster mean.
pub fn j_kmeans(f_star: &DenseMatrix, y: &Assignment) -> Result<f64> {
    check_dims(f_star, y)?;
    let c = y.c();
    let dim = f_star.ncols();
    let counts = y.counts();
    let mut means = DenseMatrix::zeros(c, dim);
    for (i, &l) in y.labels().iter().enumerate() {
        let mut row = means.row_mut(l);
        row += f_star.row(i);
    }
    for (j, &k) in counts.iter().enumerate() {
        means.row_mut(j).scale_mut(1.0 / k as f64);
    }
    Ok(y.labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| (f_star.row(i) - means.row(l)).norm_squared())
        .sum())
}

fn ratio_indicator(y: &Assignment) -> DenseMatrix {
    let w = cluster_weights(y.labels(), y.c(), &vec![1.0; y.n()]);
    let mut g = DenseMatrix::zeros(y.n(), y.c());
    for (i, &l) in y.labels().iter().enumerate() {
        g[(i, l)] = 1.0 / w[l].sqrt();
    }
    g
}

fn rotation_residual(f_star: &DenseMatrix, gm: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let r = procrustes(&(f_star.transpose() * gm))?;
    let delta = gm - f_star * &r;
    Ok((r, delta))
}

/// `min_R ‖F*R − f(Y)‖²` with `f` taken from the graph's cut convention.
pub fn j_isr(f_star: &DenseMatrix, y: &Assignment, g: &Graph) -> Result<f64> {
    check_dims(f_star, y)?;
    let gm = scaled_indicator(y, g)?;
    Ok(rotation_residual(f_star, &gm)?.1.norm_squared())
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub j_kmeans: f64,
    pub j_isr: f64,
    /// Singular values of `(YᵀY)^{-1/2} Yᵀ F*`, descending.
    pub sigma: Vec<f64>,
    pub eps_var: f64,
    pub eps: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()) + ABS_FLOOR
}

/// Ratio-cut sandwich `J_kmeans <= J_isr <= (1 + ε) J_kmeans` with the per-instance ε.
pub fn sandwich_check(f_star: &DenseMatrix, y: &Assignment) -> Result<SandwichReport> {
    check_dims(f_star, y)?;
    let gm = ratio_indicator(y);
    let sigma = singular_values(&(gm.transpose() * f_star))?;
    let eps_var = sigma
        .iter()
        .map(|&s| (1.0 - s) / (1.0 + s))
        .fold(0.0_f64, f64::max)
        .clamp(0.0, 1.0);
    let eps = eps_var + 2.0 * eps_var.sqrt();
    let j_km = j_kmeans(f_star, y)?;
    let j_rot = rotation_residual(f_star, &gm)?.1.norm_squared();
    Ok(SandwichReport {
        j_kmeans: j_km,
        j_isr: j_rot,
        lower_holds: leq(j_km, j_rot),
        upper_holds: leq(j_rot, (1.0 + eps) * j_km),
        sigma,
        eps_var,
        eps,
    })
}

/// `None` when the premise `(1 + ε₁) J_kmeans(Y₁) <= J_kmeans(Y₂)` fails; otherwise
/// whether `J_isr(Y₁) <= J_isr(Y₂)`.
pub fn ordering_check(first: &SandwichReport, second: &SandwichReport) -> Option<bool> {
    if (1.0 + first.eps) * first.j_kmeans <= second.j_kmeans {
        Some(leq(first.j_isr, second.j_isr))
    } else {
        None
    }
}

#[derive(Debug, Clone)]
pub struct RhoReport {
    /// `‖F_⊥ᵀ Δ‖²`.
    pub rho_sq: f64,
    /// `tr(Δᵀ L Δ)`.
    pub l_delta: f64,
    /// `‖Δ‖²`, never below `rho_sq`.
    pub delta_sq: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub holds: bool,
}

/// Residual `Δ = f(Y) − F*R` with `R = procrustes(F*ᵀ f(Y))`, checked against the spectrum.
pub fn rho_check(rs: &RelaxedSolution, y: &Assignment, g: &Graph) -> Result<RhoReport> {
    check_dims(&rs.f_star, y)?;
    let gm = scaled_indicator(y, g)?;
    let (_, delta) = rotation_residual(&rs.f_star, &gm)?;
    rho_of(rs, &delta, g)
}

/// ρ quantities for an arbitrary residual matrix.
pub fn rho_of(rs: &RelaxedSolution, delta: &DenseMatrix, g: &Graph) -> Result<RhoReport> {
    let lambda_max = rs
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lambda_max > 0.0) {
        return Err(Error::DegenerateGraph);
    }
    let cutoff = ZERO_EIGEN_FRACTION * lambda_max;
    let nonzero: Vec<usize> = (0..rs.eigenvalues.len())
        .filter(|&i| rs.eigenvalues[i] >= cutoff)
        .collect();
    let lambda_min = nonzero
        .iter()
        .map(|&i| rs.eigenvalues[i])
        .fold(f64::INFINITY, f64::min);

    let mut rho_sq = 0.0;
    for &i in &nonzero {
        let proj = rs.eigenvectors.column(i).transpose() * delta;
        rho_sq += proj.norm_squared();
    }
    let l_delta = crate::numerics::trace_product(delta, &(&g.laplacian * delta));
    let delta_sq = delta.norm_squared();
    let tol = REL_TOL * lambda_max * delta_sq + ABS_FLOOR;
    let holds = lambda_min * rho_sq <= l_delta + tol && l_delta <= lambda_max * rho_sq + tol;
    Ok(RhoReport {
        rho_sq,
        l_delta,
        delta_sq,
        lambda_min,
        lambda_max,
        holds,
    })
}

/// ρ² at the cut optimum and at the Euclidean-closest partition, with the implied
/// additive constant of `ρ²(Δ*) <= (λ_max/λ_min) ρ²(Δ†) + const`. Reported, not asserted.
#[derive(Debug, Clone)]
pub struct RhoComparison {
    pub rho_sq_optimum: f64,
    pub rho_sq_closest: f64,
    pub condition: f64,
    pub implied_constant: f64,
}

pub fn compare_rho(
    rs: &RelaxedSolution,
    g: &Graph,
    optimum: &Assignment,
    closest: &Assignment,
) -> Result<RhoComparison> {
    let a = rho_check(rs, optimum, g)?;
    let b = rho_check(rs, closest, g)?;
    let condition = a.lambda_max / a.lambda_min;
    Ok(RhoComparison {
        rho_sq_optimum: a.rho_sq,
        rho_sq_closest: b.rho_sq,
        condition,
        implied_constant: a.rho_sq - condition * b.rho_sq,
    })
}

// ---------------------------------------------------------------------------
// Randomized suite

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckTally {
    pub checked: usize,
    pub violations: usize,
}

impl CheckTally {
    fn record(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRow {
    pub instance: usize,
    pub cut: CutKind,
    pub n: usize,
    pub c: usize,
    pub max_sigma: f64,
    pub j_kmeans: f64,
    pub j_isr: f64,
    pub eps_var: f64,
    pub eps: f64,
    pub sandwich_ok: bool,
    pub rho_sq: f64,
    pub l_delta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rho_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheorySuite {
    pub sigma_bound: CheckTally,
    pub max_sigma: f64,
    pub sandwich: CheckTally,
    pub ordering: CheckTally,
    pub rho: CheckTally,
    pub rows: Vec<InstanceRow>,
}

impl TheorySuite {
    pub fn passed(&self) -> bool {
        self.sigma_bound.passed()
            && self.sandwich.passed()
            && self.ordering.passed()
            && self.rho.passed()
    }
}

/// Runs `trials` random instances of each check; instance `t` is seeded from `(seed, t)`.
pub fn run_theory_suite(trials: usize, seed: u64) -> Result<TheorySuite> {
    if trials == 0 {
        return Err(Error::EmptyReport(
            "theory suite needs at least one trial".into(),
        ));
    }
    let mut sigma_bound = CheckTally::default();
    let mut max_sigma = 0.0_f64;
    let mut sandwich = CheckTally::default();
    let mut ordering = CheckTally::default();
    let mut rho = CheckTally::default();
    let mut rows = Vec::with_capacity(2 * trials);

    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_u64(&[seed, t as u64]));

        // Cross products of random orthonormal pairs.
        let n = rng.random_range(5..=50);
        let c = rng.random_range(2..=5);
        let a = DenseMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0))
            .qr()
            .q();
        let b = DenseMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0))
            .qr()
            .q();
        let top = singular_values(&(a.transpose() * b))?[0];
        max_sigma = max_sigma.max(top);
        sigma_bound.record(top <= 1.0 + 1e-10);

        let n = rng.random_range(6..=30);
        let c = rng.random_range(2..=4);
        let weights = gen_random_graph(&RandomGraphSpec {
            n,
            seed: rng.random(),
        })?;
        for cut in CutKind::ALL {
            let g = build_graph_from_weights(weights.clone(), cut)?;
            let rs = solve_relaxed(&g, c)?;

            // A k-means labeling plus a few random ones, so some pairs satisfy the premise.
            let mut candidates =
                vec![km_discretize(&rs.f_star, c, rng.random(), 3, 100)?.assignment];
            for _ in 0..4 {
                candidates.push(Assignment::new(random_labels(n, c, &mut rng), c)?);
            }

            let rho_report = rho_check(&rs, &candidates[1], &g)?;
            rho.record(rho_report.holds);

            let mut row = InstanceRow {
                instance: t,
                cut,
                n,
                c,
                max_sigma: top,
                j_kmeans: f64::NAN,
                j_isr: f64::NAN,
                eps_var: f64::NAN,
                eps: f64::NAN,
                sandwich_ok: true,
                rho_sq: rho_report.rho_sq,
                l_delta: rho_report.l_delta,
                lambda_min: rho_report.lambda_min,
                lambda_max: rho_report.lambda_max,
                rho_ok: rho_report.holds,
            };

            if cut == CutKind::Ratio {
                let reports: Vec<SandwichReport> = candidates
                    .iter()
                    .map(|y| sandwich_check(&rs.f_star, y))
                    .collect::<Result<_>>()?;
                let main = &reports[1];
                sandwich.record(main.holds());
                row.j_kmeans = main.j_kmeans;
                row.j_isr = main.j_isr;
                row.eps_var = main.eps_var;
                row.eps = main.eps;
                row.sandwich_ok = main.holds();
                for (i, first) in reports.iter().enumerate() {
                    for (j, second) in reports.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        if let Some(ok) = ordering_check(first, second) {
                            ordering.record(ok);
                        }
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(TheorySuite {
        sigma_bound,
        max_sigma,
        sandwich,
        ordering,
        rho,
        rows,
    })
}
