//! Small dense linear-algebra helpers over nalgebra.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `a x = b` for a matrix right-hand side; fails on singular or
/// badly conditioned systems (backward residual above `1e-8`).
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = a.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::SingularSystem(format!("{}x{} system has no unique solution", a.nrows(), a.ncols())))?;
    let resid = (a * &x - b).amax();
    let scale = 1.0 + b.amax();
    if !x.iter().all(|v| v.is_finite()) || resid > 1e-8 * scale {
        return Err(Error::SingularSystem(format!("residual {resid:e}")));
    }
    Ok(x)
}

pub fn solve_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = solve(a, &bm)?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// Stationary distribution of an irreducible stochastic matrix.
pub fn stationary(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    Ok(solve_vec(&a, &b)?.iter().copied().collect())
}

/// Max-norm of a slice.
pub fn max_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
}

/// `max_i x_i - min_i x_i`.
pub fn span(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// `max_i |x_i - y_i|`.
pub fn max_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
}

/// `min_c ||x - y - c 1||_inf = span(x - y) / 2`.
pub fn dist_mod_constant(x: &[f64], y: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .zip(y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a - b), hi.max(a - b)));
    if lo > hi {
        0.0
    } else {
        (hi - lo) / 2.0
    }
}

/// Numerical rank with singular values above `rel_tol * sigma_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}
