//! Dense linear algebra used throughout the crate.
//!
//! Symmetric eigendecomposition and SVD are delegated to `nalgebra`; this module
//! fixes the ordering and sign conventions so results are reproducible, and adds
//! the orthogonal Procrustes solver used by every rotation-based discretizer.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

const EIG_EPS: f64 = 1e-15;
const MAX_ITERATIONS: usize = 10_000;
const SYMMETRY_TOL: f64 = 1e-10;
const SIGN_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DenseMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn max_abs(a: &DenseMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Checks that `a` is square and symmetric up to a relative tolerance.
pub fn ensure_symmetric(a: &DenseMatrix, rel_tol: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::contract(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = max_abs(a).max(1.0);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > rel_tol * scale {
                return Err(Error::contract(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

fn ensure_finite(a: &DenseMatrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::contract("matrix has non-finite entries"))
    }
}

/// Flips each column so its first significant component is positive.
fn canonicalize_signs(v: &mut DenseMatrix) {
    for mut col in v.column_iter_mut() {
        if let Some(first) = col.iter().find(|x| x.abs() > SIGN_TOL) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

pub fn sym_eig(a: &DenseMatrix) -> Result<EigenDecomposition> {
    ensure_finite(a)?;
    ensure_symmetric(a, SYMMETRY_TOL)?;
    // Use the exactly symmetric part so tiny asymmetries cannot leak into the solver.
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, MAX_ITERATIONS)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;

    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    canonicalize_signs(&mut eigenvectors);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Thin SVD `m = u * diag(s) * vᵀ` with `k = min(rows, cols)` singular values.
pub fn thin_svd(m: &DenseMatrix) -> Result<ThinSvd> {
    ensure_finite(m)?;
    let svd = SVD::try_new(m.clone(), true, true, EIG_EPS, MAX_ITERATIONS)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let u_raw = svd.u.expect("u requested");
    let v_raw = svd.v_t.expect("v requested").transpose();
    let k = svd.singular_values.len();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut u = DenseMatrix::zeros(m.nrows(), k);
    let mut v = DenseMatrix::zeros(m.ncols(), k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let s = svd.singular_values[src];
        // nalgebra reports nonnegative values, but fold any sign into u to be safe.
        if s < 0.0 {
            u.set_column(dst, &(-u_raw.column(src)));
        } else {
            u.set_column(dst, &u_raw.column(src));
        }
        v.set_column(dst, &v_raw.column(src));
        singular_values.push(s.abs());
    }
    Ok(ThinSvd {
        u,
        singular_values,
        v,
    })
}

/// Orthogonal `R` maximizing `tr(Rᵀ M)`, i.e. `R = U Vᵀ` from the SVD of `M`.
pub fn procrustes(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::contract(format!(
            "procrustes needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = thin_svd(m)?;
    Ok(&svd.u * svd.v.transpose())
}

/// Singular values only, descending.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    let mut s: Vec<f64> = m
        .clone()
        .try_svd(false, false, EIG_EPS, MAX_ITERATIONS)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?
        .singular_values
        .iter()
        .map(|x| x.abs())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

pub fn trace_product(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    // tr(Aᵀ B) without forming the product.
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn diag(values: &[f64]) -> DenseMatrix {
    DenseMatrix::from_diagonal(&DVector::from_column_slice(values))
}
