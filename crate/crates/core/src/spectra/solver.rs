//! Largest eigenvalue of a Hermitian positive semidefinite operator on the
//! orthogonal complement of a known subspace.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::haar_mc::stream_rng;
use crate::moment_op::{LinearOperator, StateVector};
use crate::C64;

/// Power iterations before [`Method::Auto`] hands over to Lanczos.
pub const AUTO_SWITCH_ITERATIONS: usize = 10_000;
const STAGNATION_WINDOW: usize = 100;
const STAGNATION_RELATIVE_CHANGE: f64 = 1e-14;
/// Krylov vectors are capped so that the basis fits in this many bytes.
const KRYLOV_MEMORY_BYTES: usize = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Power iteration, switching to Lanczos after
    /// [`AUTO_SWITCH_ITERATIONS`] iterations.
    #[default]
    Auto,
    Power,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target for `‖Av − λv‖` with `‖v‖ = 1`.
    pub tol: f64,
    /// Operator applications allowed.
    pub max_iter: usize,
    pub seed: u64,
    pub method: Method,
    /// Krylov basis size for Lanczos; capped by memory.
    pub krylov_dim: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1_000_000,
            seed: 0,
            method: Method::Auto,
            krylov_dim: 24,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: StateVector,
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

/// Removes the components along an orthonormal set (twice, for stability).
pub fn deflate(v: &mut StateVector, basis: &[StateVector]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.inner(v);
            if c != C64::new(0.0, 0.0) {
                v.axpy(-c, b);
            }
        }
    }
}

fn start_vector(op: &dyn LinearOperator, deflation: &[StateVector], seed: u64, attempt: u64) -> StateVector {
    let mut rng = stream_rng(seed, attempt);
    let mut v = StateVector::random(op.shape(), &mut rng);
    deflate(&mut v, deflation);
    v.normalize();
    v
}

/// `(Av, Rayleigh quotient, ‖Av − λv‖)` for unit `v`, with `Av` deflated.
fn rayleigh(op: &dyn LinearOperator, v: &StateVector, deflation: &[StateVector]) -> Result<(StateVector, f64, f64)> {
    let mut w = op.apply(v)?;
    deflate(&mut w, deflation);
    let lambda = v.inner(&w).re;
    let mut r = w.clone();
    r.axpy(C64::new(-lambda, 0.0), v);
    Ok((w, lambda, r.norm()))
}

/// Largest eigenvalue of `op` restricted to the orthogonal complement of
/// `deflation` (which must be orthonormal and invariant under `op`).
pub fn top_deflated_eigenpair(
    op: &dyn LinearOperator,
    deflation: &[StateVector],
    opts: &SolverOptions,
) -> Result<Eigenpair> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return param(format!("tolerance must be positive, got {}", opts.tol));
    }
    if opts.max_iter == 0 {
        return param("max_iter must be positive");
    }
    if deflation.len() >= op.shape().dim() {
        // nothing left after deflation
        return Ok(Eigenpair {
            value: 0.0,
            vector: StateVector::zeros(op.shape()),
            residual: 0.0,
            iterations: 0,
            method: opts.method,
        });
    }
    match opts.method {
        Method::Lanczos => lanczos(op, deflation, opts, None, 0),
        Method::Power | Method::Auto => power(op, deflation, opts),
    }
}

fn power(op: &dyn LinearOperator, deflation: &[StateVector], opts: &SolverOptions) -> Result<Eigenpair> {
    let mut attempt = 0;
    let mut v = start_vector(op, deflation, opts.seed, attempt);
    let mut previous = f64::NAN;
    let mut flat = 0;
    let mut best = (f64::NAN, f64::INFINITY);
    for it in 1..=opts.max_iter {
        let (mut w, lambda, residual) = rayleigh(op, &v, deflation)?;
        best = (lambda, residual);
        if residual <= opts.tol {
            return Ok(Eigenpair {
                value: lambda,
                vector: v,
                residual,
                iterations: it,
                method: Method::Power,
            });
        }
        let norm = w.normalize();
        if norm == 0.0 {
            // the deflated operator annihilates v; its top eigenvalue is 0
            return Ok(Eigenpair {
                value: 0.0,
                vector: v,
                residual: 0.0,
                iterations: it,
                method: Method::Power,
            });
        }
        if opts.method == Method::Auto && it >= AUTO_SWITCH_ITERATIONS {
            return lanczos(op, deflation, opts, Some(w), it);
        }
        let change = (lambda - previous).abs() / lambda.abs().max(f64::MIN_POSITIVE);
        flat = if change < STAGNATION_RELATIVE_CHANGE { flat + 1 } else { 0 };
        previous = lambda;
        if flat >= STAGNATION_WINDOW {
            if attempt > 0 {
                break;
            }
            attempt += 1;
            flat = 0;
            previous = f64::NAN;
            w = start_vector(op, deflation, opts.seed, attempt);
        }
        v = w;
    }
    Err(Error::Convergence {
        estimate: best.0,
        residual: best.1,
        iterations: opts.max_iter,
    })
}

/// Top eigenpair of a small Hermitian matrix.
fn top_ritz(h: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = evd.S();
    let values = (0..h.nrows()).map(|i| s[i].re).collect();
    Ok((values, evd.U().to_owned()))
}

fn combine(basis: &[StateVector], coefficients: impl Iterator<Item = C64>) -> StateVector {
    let mut out = StateVector::zeros(basis[0].shape());
    for (b, c) in basis.iter().zip(coefficients) {
        out.axpy(c, b);
    }
    out
}

/// Thick-restart Lanczos with full reorthogonalization.
///
/// The projected matrix is assembled column by column from the
/// Gram-Schmidt coefficients; after each cycle the top half of the Ritz
/// vectors is kept and the last residual direction continues the basis.
fn lanczos(
    op: &dyn LinearOperator,
    deflation: &[StateVector],
    opts: &SolverOptions,
    start: Option<StateVector>,
    used: usize,
) -> Result<Eigenpair> {
    let dim = op.shape().dim();
    let available = dim - deflation.len();
    let memory_cap = (KRYLOV_MEMORY_BYTES / (16 * dim)).max(4);
    let m = opts.krylov_dim.max(4).min(memory_cap).min(available);
    let keep = (m / 2).max(1);

    let mut basis: Vec<StateVector> = Vec::with_capacity(m + 1);
    let mut next = start.unwrap_or_else(|| start_vector(op, deflation, opts.seed, 0));
    let mut h = Mat::<C64>::zeros(m, m);
    let mut applications = used;
    let mut best = (f64::NAN, f64::INFINITY);
    let mut attempt = 0;

    loop {
        // expand the basis to m vectors
        let mut invariant = false;
        while basis.len() < m {
            let j = basis.len();
            basis.push(next.clone());
            if applications >= opts.max_iter {
                return Err(Error::Convergence {
                    estimate: best.0,
                    residual: best.1,
                    iterations: applications,
                });
            }
            let mut w = op.apply(&basis[j])?;
            applications += 1;
            deflate(&mut w, deflation);
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = b.inner(&w);
                    h[(i, j)] += c;
                    w.axpy(-c, b);
                }
            }
            for i in 0..j {
                h[(j, i)] = h[(i, j)].conj();
            }
            h[(j, j)] = C64::new(h[(j, j)].re, 0.0);
            let beta = w.normalize();
            let scale = h[(j, j)].norm().max(1.0);
            if beta <= 1e-12 * scale {
                invariant = true;
                break;
            }
            next = w;
        }

        let k = basis.len();
        let sub = h.as_ref().submatrix(0, 0, k, k).to_owned();
        let (values, vectors) = top_ritz(&sub)?;
        let top = k - 1;
        let mut x = combine(&basis, (0..k).map(|i| vectors[(i, top)]));
        x.normalize();
        let (_, lambda, residual) = rayleigh(op, &x, deflation)?;
        applications += 1;
        best = (lambda, residual);
        if residual <= opts.tol {
            return Ok(Eigenpair {
                value: lambda,
                vector: x,
                residual,
                iterations: applications,
                method: Method::Lanczos,
            });
        }
        if invariant {
            // exact invariant subspace but residual above tol: precision
            // floor reached; restart once from a fresh vector
            if attempt > 0 {
                return Err(Error::Convergence {
                    estimate: lambda,
                    residual,
                    iterations: applications,
                });
            }
            attempt += 1;
            basis.clear();
            h = Mat::<C64>::zeros(m, m);
            let mut fresh = start_vector(op, deflation, opts.seed, 1000 + attempt);
            fresh.axpy(C64::new(1.0, 0.0), &x);
            deflate(&mut fresh, deflation);
            fresh.normalize();
            next = fresh;
            continue;
        }

        // thick restart: keep the top `keep` Ritz vectors
        let kept: Vec<usize> = (k - keep..k).collect();
        let new_basis: Vec<StateVector> = kept
            .iter()
            .map(|&c| combine(&basis, (0..k).map(|i| vectors[(i, c)])))
            .collect();
        let mut new_h = Mat::<C64>::zeros(m, m);
        for (a, &c) in kept.iter().enumerate() {
            new_h[(a, a)] = C64::new(values[c], 0.0);
        }
        basis = new_basis;
        // re-orthonormalize the kept vectors against rounding drift
        for j in 0..basis.len() {
            let (head, tail) = basis.split_at_mut(j);
            let v = &mut tail[0];
            for b in head.iter() {
                let c = b.inner(v);
                v.axpy(-c, b);
            }
            v.normalize();
        }
        h = new_h;
        // `next` (the last residual direction) is orthogonal to the old basis
        // and hence to the kept Ritz vectors
    }
}
