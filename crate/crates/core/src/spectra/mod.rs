//! Spectral quantities of the moment operators.
//!
//! The eigenvalue-1 eigenspace of the local and parallel moment operators is
//! exactly `span{ψ_π,d^{⊗n}}`, so it is projected out analytically (from
//! [`ground_space_basis`]) and λ₂ becomes the dominant eigenvalue of what is
//! left.

mod solver;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg;
use crate::moment_op::{
    dense_materialize_real, ground_space_vectors, LinearOperator, MatrixFreeOperator, OperatorKind, Product, Shape,
    StateVector,
};
use crate::permgroup::{build_frame, enumerate_group, ground_space_basis, Permutation};

pub use solver::{deflate, top_deflated_eigenpair, Eigenpair, Method, SolverOptions, AUTO_SWITCH_ITERATIONS};

/// Dense path of [`rho_haar_min_eig`] is limited to `N^{2t} ≤ 4096`.
pub const RHO_HAAR_GUARD: usize = 4096;
/// Budget for the deflation basis plus solver work vectors.
const DEFLATION_MEMORY_BYTES: u128 = 3 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    GLocal,
    GParallel,
    GapH,
    DetectabilityNorm,
    RhoHaarMinEig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub quantity: Quantity,
    pub value: f64,
    /// `‖Av − λv‖` for the unit eigenvector, in the units of `value`.
    pub residual: f64,
    pub iterations: usize,
    /// For [`Quantity::RhoHaarMinEig`], `n = 1` and `d` is the dimension `N`.
    pub n: usize,
    pub t: usize,
    pub d: usize,
    pub deflation_rank: usize,
    pub method: Option<Method>,
}

/// Orthonormal basis of the common fixed space of all `P_{i,i+1}`.
pub fn ground_deflation(shape: Shape) -> Result<Vec<StateVector>> {
    let rank_bound = crate::permgroup::factorial(shape.t) as u128;
    let required = (rank_bound + 4) * shape.dim_u128() * 16;
    if required > DEFLATION_MEMORY_BYTES {
        return Err(Error::Guard {
            what: format!("deflation basis for {shape:?} (bytes)"),
            required,
            limit: DEFLATION_MEMORY_BYTES,
        });
    }
    let basis = ground_space_basis(shape.n, shape.t, shape.d as u64)?;
    ground_space_vectors(&basis)
}

fn report(quantity: Quantity, shape: Shape, pair: &Eigenpair, deflation_rank: usize) -> SpectralReport {
    SpectralReport {
        quantity,
        value: pair.value,
        residual: pair.residual,
        iterations: pair.iterations,
        n: shape.n,
        t: shape.t,
        d: shape.d,
        deflation_rank,
        method: Some(pair.method),
    }
}

/// `g(ν, t) = λ₂` of the local or parallel moment operator.
pub fn second_eigenvalue(op: &MatrixFreeOperator, opts: &SolverOptions) -> Result<SpectralReport> {
    let quantity = match op.kind() {
        OperatorKind::LocalMoment => Quantity::GLocal,
        OperatorKind::ParallelMoment => Quantity::GParallel,
        other => return param(format!("second_eigenvalue needs a moment operator, got {other:?}")),
    };
    let deflation = ground_deflation(op.shape())?;
    let pair = top_deflated_eigenpair(op, &deflation, opts)?;
    Ok(report(quantity, op.shape(), &pair, deflation.len()))
}

/// λ₂ of an arbitrary product or power of moment operators sharing the
/// ground space, e.g. `M^k`.
pub fn second_eigenvalue_of(op: &dyn LinearOperator, opts: &SolverOptions) -> Result<Eigenpair> {
    let deflation = ground_deflation(op.shape())?;
    top_deflated_eigenpair(op, &deflation, opts)
}

/// `Δ(H_{n,t}) = (n − 1)(1 − λ₂(M_local))`.
pub fn hamiltonian_gap(n: usize, t: usize, d: usize, opts: &SolverOptions) -> Result<SpectralReport> {
    let op = MatrixFreeOperator::local_moment(n, t, d)?;
    let scale = (n - 1) as f64;
    let local = second_eigenvalue(&op, &opts.with_tol(opts.tol / scale))?;
    Ok(SpectralReport {
        quantity: Quantity::GapH,
        value: scale * (1.0 - local.value),
        residual: scale * local.residual,
        ..local
    })
}

/// `‖P_odd P_even − P_c‖_∞`, as the square root of the top eigenvalue of
/// `P_even P_odd P_even` on the complement of the ground space.
pub fn detectability_norm(n: usize, t: usize, d: usize, opts: &SolverOptions) -> Result<SpectralReport> {
    if n % 2 == 1 {
        return param(format!("detectability norm needs even n, got {n}"));
    }
    let odd = MatrixFreeOperator::new(OperatorKind::OddProduct, n, t, d)?;
    let even = odd.with_kind(OperatorKind::EvenProduct)?;
    let sandwich = Product::new(vec![&even, &odd, &even])?;
    let deflation = ground_deflation(odd.shape())?;
    // residual of λ is ~2√λ times that of √λ; ask for a little extra
    let pair = top_deflated_eigenpair(&sandwich, &deflation, &opts.with_tol(opts.tol / 2.0))?;
    let value = pair.value.max(0.0).sqrt();
    let residual = if value > 0.0 {
        pair.residual / (2.0 * value)
    } else {
        pair.residual.sqrt()
    };
    Ok(SpectralReport {
        quantity: Quantity::DetectabilityNorm,
        value,
        residual: residual.min(pair.residual.sqrt()),
        iterations: pair.iterations,
        n,
        t,
        d,
        deflation_rank: deflation.len(),
        method: Some(pair.method),
    })
}

/// Dense `V(π)` on `(ℂ^N)^{⊗t}`: moves the tensor factor at slot `k` to slot `π(k)`.
fn permutation_matrix(pi: &Permutation, big_n: usize) -> Mat<f64> {
    let t = pi.degree();
    let dim = big_n.pow(t as u32);
    let mut m = Mat::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let mut digits = vec![0; t];
        let mut rest = col;
        for digit in digits.iter_mut() {
            *digit = rest % big_n;
            rest /= big_n;
        }
        let mut row = 0;
        for k in (0..t).rev() {
            // slot k of the image holds digit π⁻¹(k)
            let source = (0..t).find(|&s| pi.apply(s) == k).expect("bijection");
            row = row * big_n + digits[source];
        }
        m[(row, col)] = 1.0;
    }
    m
}

/// `ρ_Haar = (Δ_Haar,t ⊗ id)(Φ_N^{⊗t}) = N^{−t} Σ_{π,σ} Wg(π, σ) V(π) ⊗ V(σ)`.
pub fn rho_haar(big_n: usize, t: usize) -> Result<Mat<f64>> {
    if big_n < 2 || t == 0 {
        return param(format!("need N >= 2 and t >= 1, got N = {big_n}, t = {t}"));
    }
    let required = (big_n as u128).checked_pow(2 * t as u32).unwrap_or(u128::MAX);
    if required > RHO_HAAR_GUARD as u128 {
        return Err(Error::Guard {
            what: format!("dense twirl of Φ_N^(⊗t) for N = {big_n}, t = {t}"),
            required,
            limit: RHO_HAAR_GUARD as u128,
        });
    }
    let frame = build_frame(t, big_n as u64)?;
    let perms = enumerate_group(t)?;
    let mats: Vec<Mat<f64>> = perms.iter().map(|p| permutation_matrix(p, big_n)).collect();
    let half = big_n.pow(t as u32);
    let norm = (big_n as f64).powi(t as i32);
    // Weingarten matrix is the pseudo-inverse of tr(V(π)†V(σ)) = N^t · gram
    let weight = |p: usize, s: usize| frame.dual()[(p, s)] / (norm * norm);
    let dim = half * half;
    let mut rho = Mat::<f64>::zeros(dim, dim);
    for (p, vp) in mats.iter().enumerate() {
        for (s, vs) in mats.iter().enumerate() {
            let w = weight(p, s);
            if w == 0.0 {
                continue;
            }
            // kron(V(π), V(σ)): V(π) on the system, V(σ) on the reference
            for a in 0..half {
                for b in 0..half {
                    let x = vp[(a, b)];
                    if x == 0.0 {
                        continue;
                    }
                    for c in 0..half {
                        for e in 0..half {
                            let y = vs[(c, e)];
                            if y != 0.0 {
                                rho[(a * half + c, b * half + e)] += w * x * y;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rho)
}

/// Minimum eigenvalue of `ρ_Haar` on its support.
pub fn rho_haar_min_eig(big_n: usize, t: usize) -> Result<SpectralReport> {
    let rho = rho_haar(big_n, t)?;
    let dim = rho.nrows();
    let sym = Mat::<f64>::from_fn(dim, dim, |i, j| 0.5 * (rho[(i, j)] + rho[(j, i)]));
    let (values, vectors) = linalg::symmetric_eigen(&sym)?;
    let largest = values.iter().fold(0.0f64, |a, &v| a.max(v));
    let (index, value) = values
        .iter()
        .copied()
        .enumerate()
        .find(|&(_, v)| v > linalg::RANK_TOLERANCE * largest)
        .ok_or_else(|| Error::Linalg("twirled state has empty support".into()))?;
    let support = values.iter().filter(|&&v| v > linalg::RANK_TOLERANCE * largest).count();
    let v = Mat::<f64>::from_fn(dim, 1, |i, _| vectors[(i, index)]);
    let r = &rho * &v;
    let residual = (0..dim)
        .map(|i| (r[(i, 0)] - value * v[(i, 0)]).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(SpectralReport {
        quantity: Quantity::RhoHaarMinEig,
        value,
        residual,
        iterations: 0,
        n: 1,
        t,
        d: big_n,
        deflation_rank: support,
        method: None,
    })
}

/// Dense oracle: the largest eigenvalue of `op` after discarding its top
/// `ground_rank` eigenvalues, which must all equal 1 to within `1e-8`.
pub fn dense_second_eigenvalue(op: &dyn LinearOperator, ground_rank: usize, guard: usize) -> Result<f64> {
    let m = dense_materialize_real(op, guard)?;
    let dim = m.nrows();
    let sym = Mat::<f64>::from_fn(dim, dim, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let values = linalg::symmetric_eigenvalues(&sym)?;
    if ground_rank >= dim {
        return Ok(0.0);
    }
    for &v in &values[dim - ground_rank..] {
        if (v - 1.0).abs() > 1e-8 {
            return Err(Error::Linalg(format!("expected eigenvalue 1 in the ground space, found {v}")));
        }
    }
    Ok(values[dim - ground_rank - 1])
}
