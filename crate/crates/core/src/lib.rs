//! Exact convergence numerics for local and parallel random quantum circuits.
//!
//! The crate computes, at desk scale, the quantities that control how fast
//! random nearest-neighbour circuits approach the Haar measure:
//!
//! * the tensor-product-expander value `g(ν, t)` of the local and parallel
//!   walks, as the second eigenvalue of their moment operators,
//! * the spectral gap of the frustration-free Hamiltonian `H_{n,t}`,
//! * the detectability-lemma norm `‖P_odd P_even − P_c‖_∞`,
//!
//! all matrix-free on top of the permutation-state frame ([`permgroup`],
//! [`moment_op`], [`spectra`]). [`haar_mc`] samples circuits for frame
//! potentials and the topological-order experiment, and [`bounds`]
//! evaluates the closed-form inequalities these numbers are compared with.

pub mod bounds;
mod error;
pub mod haar_mc;
pub mod linalg;
pub mod moment_op;
pub mod permgroup;
mod reduce;
pub mod spectra;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
