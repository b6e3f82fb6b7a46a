use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::reduce;
use crate::C64;

/// Largest state-vector length accepted by the matrix-free kernels (2^26).
pub const MAX_STATE_DIM: u128 = 1 << 26;

/// `(n sites, t copies, local dimension d)` of the doubled space
/// `(ℂ^{d^{2t}})^{⊗n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n: usize,
    pub t: usize,
    pub d: usize,
}

impl Shape {
    pub fn new(n: usize, t: usize, d: usize) -> Result<Self> {
        if n == 0 || t == 0 || d < 2 {
            return param(format!("need n >= 1, t >= 1, d >= 2 (got n={n}, t={t}, d={d})"));
        }
        let shape = Self { n, t, d };
        let required = shape.dim_u128();
        if required > MAX_STATE_DIM {
            return Err(Error::Guard {
                what: format!("state vector for (n={n}, t={t}, d={d})"),
                required,
                limit: MAX_STATE_DIM,
            });
        }
        Ok(shape)
    }

    /// Dimension of one site, `d^{2t}`.
    pub fn site_dim(&self) -> usize {
        self.d.pow(2 * self.t as u32)
    }

    pub fn dim(&self) -> usize {
        self.site_dim().pow(self.n as u32)
    }

    /// `d^{2tn}` without overflow, for guard checks.
    pub fn dim_u128(&self) -> u128 {
        let log2 = 2.0 * (self.t * self.n) as f64 * (self.d as f64).log2();
        if log2 >= 120.0 {
            return u128::MAX;
        }
        (self.d as u128).pow((2 * self.t * self.n) as u32)
    }
}

/// Amplitudes over `(ℂ^{d^{2t}})^{⊗n}`.
///
/// Index layout: site `s` contributes `local_s · D^s` with `D = d^{2t}`, so
/// site 0 varies fastest. Within a site, leg `k` contributes `x_k · d^k`;
/// legs `0..t` are the forward copies and legs `t..2t` the conjugate copies.
#[derive(Debug)]
pub struct StateVector {
    shape: Shape,
    amplitudes: Vec<C64>,
    norm: OnceLock<f64>,
}

impl Clone for StateVector {
    fn clone(&self) -> Self {
        Self {
            shape: self.shape,
            amplitudes: self.amplitudes.clone(),
            norm: self.norm.clone(),
        }
    }
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.amplitudes == other.amplitudes
    }
}

impl StateVector {
    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            amplitudes: vec![C64::new(0.0, 0.0); shape.dim()],
            norm: OnceLock::new(),
        }
    }

    pub fn from_amplitudes(shape: Shape, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != shape.dim() {
            return param(format!(
                "{} amplitudes given, shape {:?} needs {}",
                amplitudes.len(),
                shape,
                shape.dim()
            ));
        }
        Ok(Self {
            shape,
            amplitudes,
            norm: OnceLock::new(),
        })
    }

    pub fn basis(shape: Shape, index: usize) -> Self {
        let mut v = Self::zeros(shape);
        v.amplitudes[index] = C64::new(1.0, 0.0);
        v
    }

    /// Normalized vector of i.i.d. complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(shape: Shape, rng: &mut R) -> Self {
        let amplitudes = (0..shape.dim())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut v = Self {
            shape,
            amplitudes,
            norm: OnceLock::new(),
        };
        v.normalize();
        v
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Mutable access; drops the cached norm.
    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        self.norm = OnceLock::new();
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        *self.norm.get_or_init(|| reduce::norm_sqr(&self.amplitudes).sqrt())
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.shape, other.shape);
        reduce::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes_mut().par_iter_mut().for_each(|a| *a *= factor);
    }

    /// `self += alpha · x`.
    pub fn axpy(&mut self, alpha: C64, x: &StateVector) {
        debug_assert_eq!(self.shape, x.shape);
        self.amplitudes_mut()
            .par_iter_mut()
            .zip(x.amplitudes.par_iter())
            .for_each(|(a, b)| *a += alpha * b);
    }

    /// Scales to unit norm and returns the previous norm; zero vectors are left alone.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(C64::new(1.0 / n, 0.0));
        }
        n
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        let diff: Vec<C64> = self
            .amplitudes
            .par_iter()
            .zip(other.amplitudes.par_iter())
            .map(|(a, b)| a - b)
            .collect();
        reduce::norm_sqr(&diff).sqrt()
    }
}
