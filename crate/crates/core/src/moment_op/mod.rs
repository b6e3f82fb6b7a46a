//! Matrix-free moment operators on `(ℂ^{d^{2t}})^{⊗n}`.
//!
//! `P_{i,i+1}` is the Haar average of `U^{⊗t} ⊗ Ū^{⊗t}` for a two-qudit gate
//! on sites `i, i+1`; it is the orthogonal projector onto the span of the
//! two-site permutation states. From it we build
//!
//! * the Hamiltonian `H = Σ_i (I − P_{i,i+1})`,
//! * the local-walk moment operator `(1/(n−1)) Σ_i P_{i,i+1}`,
//! * the parallel-walk moment operator `½ P_odd + ½ P_even`.
//!
//! Sites are 0-based here: pair `i` couples sites `i` and `i + 1`.

mod dense;
pub mod kernel;
mod state;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::permgroup::{build_frame, enumerate_group, FrameData, GroundSpaceBasis, Permutation, MAX_FRAME_T};
use crate::C64;

pub use dense::{dense_materialize, dense_materialize_real, DEFAULT_DENSE_GUARD};
pub use kernel::BlockKernel;
pub use state::{Shape, StateVector, MAX_STATE_DIM};

/// Anything that maps state vectors of one shape to state vectors of the same shape.
pub trait LinearOperator: Sync {
    fn shape(&self) -> Shape;
    fn apply(&self, v: &StateVector) -> Result<StateVector>;

    fn check(&self, v: &StateVector) -> Result<()> {
        if v.shape() != self.shape() {
            return param(format!(
                "vector shape {:?} does not match operator shape {:?}",
                v.shape(),
                self.shape()
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `P_{i,i+1}` with 0-based `i`.
    Projector(usize),
    Hamiltonian,
    LocalMoment,
    ParallelMoment,
    /// `P_{0,1} P_{2,3} ⋯`
    OddProduct,
    /// `P_{1,2} P_{3,4} ⋯`; the identity when no such pair exists.
    EvenProduct,
}

#[derive(Clone, Debug)]
pub struct MatrixFreeOperator {
    kind: OperatorKind,
    shape: Shape,
    frame: Arc<FrameData>,
    kernel: Arc<BlockKernel>,
}

impl MatrixFreeOperator {
    pub fn new(kind: OperatorKind, n: usize, t: usize, d: usize) -> Result<Self> {
        if t > MAX_FRAME_T {
            return param(format!("t = {t} exceeds the t! guard (t <= {MAX_FRAME_T})"));
        }
        let shape = Shape::new(n, t, d)?;
        if n < 2 {
            return param(format!("need at least two sites, got n = {n}"));
        }
        match kind {
            OperatorKind::Projector(i) if i + 1 >= n => {
                return param(format!("pair ({i}, {}) outside a chain of {n} sites", i + 1));
            }
            OperatorKind::ParallelMoment if n % 2 == 1 => {
                return param(format!("parallel walk needs an even number of sites, got n = {n}"));
            }
            _ => {}
        }
        let frame = Arc::new(build_frame(t, (d * d) as u64)?);
        let kernel = Arc::new(BlockKernel::new(&frame, d));
        Ok(Self {
            kind,
            shape,
            frame,
            kernel,
        })
    }

    pub fn projector(n: usize, t: usize, d: usize, site: usize) -> Result<Self> {
        Self::new(OperatorKind::Projector(site), n, t, d)
    }

    pub fn hamiltonian(n: usize, t: usize, d: usize) -> Result<Self> {
        Self::new(OperatorKind::Hamiltonian, n, t, d)
    }

    pub fn local_moment(n: usize, t: usize, d: usize) -> Result<Self> {
        Self::new(OperatorKind::LocalMoment, n, t, d)
    }

    pub fn parallel_moment(n: usize, t: usize, d: usize) -> Result<Self> {
        Self::new(OperatorKind::ParallelMoment, n, t, d)
    }

    /// Same shape and frame, different kind.
    pub fn with_kind(&self, kind: OperatorKind) -> Result<Self> {
        match kind {
            OperatorKind::Projector(i) if i + 1 >= self.shape.n => {
                param(format!("pair ({i}, {}) outside chain", i + 1))
            }
            OperatorKind::ParallelMoment if self.shape.n % 2 == 1 => {
                param("parallel walk needs an even number of sites")
            }
            _ => Ok(Self {
                kind,
                ..self.clone()
            }),
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn frame(&self) -> &FrameData {
        &self.frame
    }

    pub fn kernel(&self) -> &BlockKernel {
        &self.kernel
    }

    fn odd_pairs(&self) -> impl Iterator<Item = usize> {
        (0..self.shape.n - 1).step_by(2)
    }

    fn even_pairs(&self) -> impl Iterator<Item = usize> {
        (1..self.shape.n - 1).step_by(2)
    }

    fn accumulate_projector(&self, site: usize, v: &StateVector, out: &mut StateVector, scale: f64) {
        self.kernel
            .accumulate(self.shape, site, v.amplitudes(), out.amplitudes_mut(), scale);
    }

    fn project(&self, site: usize, v: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.shape);
        self.accumulate_projector(site, v, &mut out, 1.0);
        out
    }

    fn product(&self, sites: impl Iterator<Item = usize>, v: &StateVector) -> StateVector {
        // the factors act on disjoint pairs and commute
        let mut current: Option<StateVector> = None;
        for site in sites {
            let next = self.project(site, current.as_ref().unwrap_or(v));
            current = Some(next);
        }
        current.unwrap_or_else(|| v.clone())
    }
}

impl LinearOperator for MatrixFreeOperator {
    fn shape(&self) -> Shape {
        self.shape
    }

    fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.check(v)?;
        let n = self.shape.n;
        Ok(match self.kind {
            OperatorKind::Projector(i) => self.project(i, v),
            OperatorKind::LocalMoment => {
                let mut out = StateVector::zeros(self.shape);
                let w = 1.0 / (n - 1) as f64;
                for i in 0..n - 1 {
                    self.accumulate_projector(i, v, &mut out, w);
                }
                out
            }
            OperatorKind::Hamiltonian => {
                // (n−1) v − Σ_i P_i v
                let mut out = StateVector::zeros(self.shape);
                for i in 0..n - 1 {
                    self.accumulate_projector(i, v, &mut out, -1.0);
                }
                out.axpy(C64::new((n - 1) as f64, 0.0), v);
                out
            }
            OperatorKind::OddProduct => self.product(self.odd_pairs(), v),
            OperatorKind::EvenProduct => self.product(self.even_pairs(), v),
            OperatorKind::ParallelMoment => {
                let mut out = self.product(self.odd_pairs(), v);
                let even = self.product(self.even_pairs(), v);
                out.axpy(C64::new(1.0, 0.0), &even);
                out.scale(C64::new(0.5, 0.0));
                out
            }
        })
    }
}

/// Product of operators, applied right to left.
pub struct Product<'a> {
    factors: Vec<&'a dyn LinearOperator>,
}

impl<'a> Product<'a> {
    pub fn new(factors: Vec<&'a dyn LinearOperator>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return param("empty operator product");
        };
        let shape = first.shape();
        if factors.iter().any(|f| f.shape() != shape) {
            return param("operator product with mismatched shapes");
        }
        Ok(Self { factors })
    }

    /// `op^k`.
    pub fn power(op: &'a dyn LinearOperator, k: usize) -> Result<Self> {
        Self::new(vec![op; k])
    }
}

impl LinearOperator for Product<'_> {
    fn shape(&self) -> Shape {
        self.factors[0].shape()
    }

    fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.check(v)?;
        let mut current = v.clone();
        for f in self.factors.iter().rev() {
            current = f.apply(&current)?;
        }
        Ok(current)
    }
}

fn require(op: &MatrixFreeOperator, wanted: &[OperatorKind]) -> Result<()> {
    if wanted.contains(&op.kind()) {
        Ok(())
    } else {
        param(format!("operator kind {:?} not accepted here", op.kind()))
    }
}

pub fn apply_projector(op: &MatrixFreeOperator, v: &StateVector) -> Result<StateVector> {
    if !matches!(op.kind(), OperatorKind::Projector(_)) {
        return param(format!("expected a projector, got {:?}", op.kind()));
    }
    op.apply(v)
}

pub fn apply_hamiltonian(op: &MatrixFreeOperator, v: &StateVector) -> Result<StateVector> {
    require(op, &[OperatorKind::Hamiltonian])?;
    op.apply(v)
}

pub fn apply_local_moment(op: &MatrixFreeOperator, v: &StateVector) -> Result<StateVector> {
    require(op, &[OperatorKind::LocalMoment])?;
    op.apply(v)
}

pub fn apply_parallel_moment(op: &MatrixFreeOperator, v: &StateVector) -> Result<StateVector> {
    require(op, &[OperatorKind::ParallelMoment])?;
    op.apply(v)
}

/// `|ψ_π,d⟩^{⊗n}` as a full state vector.
pub fn permutation_product_state(shape: Shape, pi: &Permutation) -> Result<StateVector> {
    if pi.degree() != shape.t {
        return param(format!("permutation of degree {} for t = {}", pi.degree(), shape.t));
    }
    let single = kernel::single_site_support(pi, shape.d);
    let amp = (shape.d as f64).powf(-((shape.t * shape.n) as f64) / 2.0);
    let site_dim = shape.site_dim();
    let mut out = StateVector::zeros(shape);
    let amps = out.amplitudes_mut();
    let mut digits = vec![0usize; shape.n];
    loop {
        let mut index = 0;
        for s in (0..shape.n).rev() {
            index = index * site_dim + single[digits[s]];
        }
        amps[index] = C64::new(amp, 0.0);
        // odometer over the n site supports
        let mut s = 0;
        while s < shape.n {
            digits[s] += 1;
            if digits[s] < single.len() {
                break;
            }
            digits[s] = 0;
            s += 1;
        }
        if s == shape.n {
            break;
        }
    }
    Ok(out)
}

/// Orthonormal ground-space vectors `Σ_π C[k][π] ψ_π^{⊗n}`.
pub fn ground_space_vectors(basis: &GroundSpaceBasis) -> Result<Vec<StateVector>> {
    let shape = Shape::new(basis.n, basis.t, basis.d as usize)?;
    let perms = enumerate_group(basis.t)?;
    let products: Vec<StateVector> = perms
        .iter()
        .map(|p| permutation_product_state(shape, p))
        .collect::<Result<_>>()?;
    Ok((0..basis.rank)
        .map(|k| {
            let mut v = StateVector::zeros(shape);
            for (p, prod) in products.iter().enumerate() {
                let c = basis.coefficients[(k, p)];
                if c != 0.0 {
                    v.axpy(C64::new(c, 0.0), prod);
                }
            }
            v
        })
        .collect())
}
