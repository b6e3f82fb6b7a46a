//! Brute-force materialization, used as an oracle at tiny sizes.

use faer::Mat;

use crate::error::{Error, Result};
use crate::C64;

use super::{LinearOperator, StateVector};

pub const DEFAULT_DENSE_GUARD: usize = 4096;

fn check_guard(op: &dyn LinearOperator, guard: usize) -> Result<usize> {
    let dim = op.shape().dim_u128();
    if dim > guard as u128 {
        return Err(Error::Guard {
            what: format!("dense materialization of {:?}", op.shape()),
            required: dim,
            limit: guard as u128,
        });
    }
    Ok(dim as usize)
}

/// Column `k` is the operator applied to the `k`-th basis vector.
pub fn dense_materialize(op: &dyn LinearOperator, guard: usize) -> Result<Mat<C64>> {
    let dim = check_guard(op, guard)?;
    let mut m = Mat::<C64>::zeros(dim, dim);
    for k in 0..dim {
        let col = op.apply(&StateVector::basis(op.shape(), k))?;
        for (i, a) in col.amplitudes().iter().enumerate() {
            m[(i, k)] = *a;
        }
    }
    Ok(m)
}

/// Real materialization for operators with real matrix elements (all the
/// moment operators here). Fails if any imaginary part is nonzero.
pub fn dense_materialize_real(op: &dyn LinearOperator, guard: usize) -> Result<Mat<f64>> {
    let dim = check_guard(op, guard)?;
    let mut m = Mat::<f64>::zeros(dim, dim);
    for k in 0..dim {
        let col = op.apply(&StateVector::basis(op.shape(), k))?;
        for (i, a) in col.amplitudes().iter().enumerate() {
            if a.im != 0.0 {
                return Err(Error::Linalg(format!(
                    "operator has complex entry {a} at ({i}, {k})"
                )));
            }
            m[(i, k)] = a.re;
        }
    }
    Ok(m)
}
