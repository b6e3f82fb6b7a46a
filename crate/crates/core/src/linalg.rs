//! Thin wrappers over faer for the handful of dense factorizations we need.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::C64;

/// Relative cutoff below which eigenvalues/singular values count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = evd.S();
    let values = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &Mat<C64>) -> Result<Vec<f64>> {
    m.singular_values()
        .map_err(|e| Error::Linalg(format!("{e:?}")))
}

/// Sum of singular values.
pub fn trace_norm(m: &Mat<C64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Moore-Penrose pseudo-inverse of a symmetric positive semidefinite matrix.
///
/// Returns the inverse on the numerical range together with the rank.
pub fn psd_pseudo_inverse(m: &Mat<f64>) -> Result<(Mat<f64>, usize)> {
    let n = m.nrows();
    let (values, vectors) = symmetric_eigen(m)?;
    let largest = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let cutoff = RANK_TOLERANCE * largest;
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > cutoff).collect();
    let rank = kept.len();
    let basis = Mat::<f64>::from_fn(n, rank, |i, c| vectors[(i, kept[c])]);
    let scaled = Mat::<f64>::from_fn(n, rank, |i, c| vectors[(i, kept[c])] / values[kept[c]]);
    let inv = &scaled * basis.transpose();
    Ok((inv, rank))
}

/// Entry-wise max-abs distance between two matrices of equal shape.
pub fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}
