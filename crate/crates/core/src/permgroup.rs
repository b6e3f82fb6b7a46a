//! Symmetric-group machinery and the permutation-state frame.
//!
//! For a permutation `π ∈ S_t` and local dimension `q`, the permutation state
//! `|ψ_π,q⟩ = (I ⊗ V_q(π))|Φ_q^t⟩` is the normalized vectorization of the
//! operator that permutes `t` tensor factors of `ℂ^q`. Two such states overlap
//! as `⟨ψ_σ,q|ψ_π,q⟩ = q^{c(πσ⁻¹) − t}` where `c` counts cycles, so every
//! quantity in this module reduces to cycle counting plus small dense linear
//! algebra on `t! × t!` matrices.

use std::fmt;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg;

/// Largest number of copies accepted anywhere (`8! = 40320`).
pub const MAX_T: usize = 8;

/// Largest `t` for which dense `t! × t!` frame matrices are built.
///
/// `8! × 8!` doubles need 13 GB, so the frame routines refuse `t = 8`.
pub const MAX_FRAME_T: usize = 7;

/// A permutation of `{0, …, t−1}` in one-line form: `images[i] = π(i)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let t = images.len();
        if t == 0 {
            return param("permutation must act on at least one point");
        }
        let mut seen = vec![false; t];
        for &i in &images {
            if i >= t || seen[i] {
                return param(format!("{images:?} is not a bijection on 0..{t}"));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(t: usize) -> Self {
        Self {
            images: (0..t).collect(),
        }
    }

    /// Cyclic shift `i ↦ i + 1 mod t`.
    pub fn cycle(t: usize) -> Self {
        Self {
            images: (0..t).map(|i| (i + 1) % t).collect(),
        }
    }

    /// Transposition of `a` and `b` in `S_t`.
    pub fn transposition(t: usize, a: usize, b: usize) -> Result<Self> {
        if a >= t || b >= t || a == b {
            return param(format!("transposition ({a} {b}) invalid in S_{t}"));
        }
        let mut images: Vec<usize> = (0..t).collect();
        images.swap(a, b);
        Ok(Self { images })
    }

    /// Number of points acted on.
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p] = i;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let t = self.degree();
        let mut visited = vec![false; t];
        let mut cycles = 0;
        for start in 0..t {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.images[i];
            }
        }
        cycles
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

/// All of `S_t` in lexicographic one-line order; the identity comes first.
pub fn enumerate_group(t: usize) -> Result<Vec<Permutation>> {
    if t == 0 || t > MAX_T {
        return param(format!("t = {t} outside 1..={MAX_T}"));
    }
    let mut current: Vec<usize> = (0..t).collect();
    let mut out = Vec::with_capacity(factorial(t));
    loop {
        out.push(Permutation {
            images: current.clone(),
        });
        // next permutation in lexicographic order
        let Some(i) = (0..t.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..t).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    Ok(out)
}

pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_count()
}

pub fn factorial(t: usize) -> usize {
    (1..=t).product()
}

/// `⟨ψ_σ,q|ψ_π,q⟩ = q^{c(πσ⁻¹) − t}`.
pub fn overlap(pi: &Permutation, sigma: &Permutation, q: u64) -> Result<f64> {
    if pi.degree() != sigma.degree() {
        return param(format!(
            "overlap of permutations of different degree ({} vs {})",
            pi.degree(),
            sigma.degree()
        ));
    }
    if q < 2 {
        return param(format!("local dimension q = {q} must be at least 2"));
    }
    Ok(overlap_unchecked(pi, sigma, q as f64))
}

fn overlap_unchecked(pi: &Permutation, sigma: &Permutation, q: f64) -> f64 {
    let c = pi.compose(&sigma.inverse()).cycle_count();
    q.powi(c as i32 - pi.degree() as i32)
}

/// Gram matrix of the permutation states at local dimension `q` and its
/// pseudo-inverse (the dual-frame coefficients).
#[derive(Clone, Debug)]
pub struct FrameData {
    t: usize,
    q: u64,
    perms: Vec<Permutation>,
    gram: Mat<f64>,
    dual: Mat<f64>,
    rank: usize,
}

impl FrameData {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn gram(&self) -> &Mat<f64> {
        &self.gram
    }

    pub fn dual(&self) -> &Mat<f64> {
        &self.dual
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of frame vectors, `t!`.
    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// `‖gram·dual·gram − gram‖_max`.
    pub fn pseudo_inverse_defect(&self) -> f64 {
        let ggg = &(&self.gram * &self.dual) * &self.gram;
        linalg::max_abs_diff(&ggg, &self.gram)
    }
}

fn check_frame_t(t: usize) -> Result<()> {
    if t == 0 || t > MAX_T {
        return param(format!("t = {t} outside 1..={MAX_T}"));
    }
    if t > MAX_FRAME_T {
        let n = factorial(t) as u128;
        return Err(Error::Guard {
            what: format!("dense {t}! x {t}! frame matrix"),
            required: n * n * 8,
            limit: (factorial(MAX_FRAME_T) as u128).pow(2) * 8,
        });
    }
    Ok(())
}

/// Gram matrix with entries `overlap(π, σ, q)^power`.
fn powered_gram(perms: &[Permutation], q: f64, power: u32) -> Mat<f64> {
    let n = perms.len();
    let t = perms[0].degree() as i32;
    // overlaps depend only on c(πσ⁻¹) ∈ 1..=t
    let table: Vec<f64> = (0..=t).map(|c| q.powi((c - t) * power as i32)).collect();
    let inverses: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    Mat::from_fn(n, n, |i, j| {
        table[perms[i].compose(&inverses[j]).cycle_count()]
    })
}

pub fn build_frame(t: usize, q: u64) -> Result<FrameData> {
    check_frame_t(t)?;
    if q < 2 {
        return param(format!("local dimension q = {q} must be at least 2"));
    }
    let perms = enumerate_group(t)?;
    let gram = powered_gram(&perms, q as f64, 1);
    let (dual, rank) = linalg::psd_pseudo_inverse(&gram)?;
    Ok(FrameData {
        t,
        q,
        perms,
        gram,
        dual,
        rank,
    })
}

/// `Σ_π |⟨ψ_σ,d|ψ_π,d⟩|^n = ∏_{j<t} (d^n + j) / d^{tn}`, the same for every σ.
///
/// Evaluated as `exp Σ_j ln(1 + j/d^n)`, which cannot overflow.
pub fn column_sum(t: usize, d: u64, n: usize) -> Result<f64> {
    if t == 0 {
        return param("t must be positive");
    }
    if d < 2 || n == 0 {
        return param(format!("need d >= 2 and n >= 1 (got d = {d}, n = {n})"));
    }
    let inv_dim = (-(n as f64) * (d as f64).ln()).exp();
    let log_sum: f64 = (0..t).map(|j| (j as f64 * inv_dim).ln_1p()).sum();
    Ok(log_sum.exp())
}

/// Whether `t² ≤ d^n`, the regime where the quasi-orthogonality bounds apply.
pub fn quasi_orthogonal_regime(n: usize, t: usize, d: u64) -> bool {
    ((t * t) as f64).ln() <= n as f64 * (d as f64).ln() + 1e-12
}

/// Orthonormal coordinates for `span{ψ_π,d^{⊗n}}`.
#[derive(Clone, Debug)]
pub struct GroundSpaceBasis {
    pub n: usize,
    pub t: usize,
    pub d: u64,
    pub perms: Vec<Permutation>,
    /// Tensor-power Gram matrix, `overlap(π, σ, d)^n`.
    pub gram_n: Mat<f64>,
    /// `rank × t!`; row `k` holds the coefficients of the k-th orthonormal vector.
    pub coefficients: Mat<f64>,
    pub rank: usize,
}

/// Symmetric (Löwdin) orthogonalization of the `ψ_π,d^{⊗n}`; falls back to
/// canonical orthogonalization on the numerical range when the states are
/// linearly dependent (`t > d^n`).
pub fn ground_space_basis(n: usize, t: usize, d: u64) -> Result<GroundSpaceBasis> {
    check_frame_t(t)?;
    if d < 2 || n == 0 {
        return param(format!("need d >= 2 and n >= 1 (got d = {d}, n = {n})"));
    }
    let perms = enumerate_group(t)?;
    let gram_n = powered_gram(&perms, d as f64, n as u32);
    let m = perms.len();
    let (values, vectors) = linalg::symmetric_eigen(&gram_n)?;
    let largest = values.iter().fold(0.0f64, |a, &v| a.max(v));
    let kept: Vec<usize> = (0..m)
        .filter(|&k| values[k] > linalg::RANK_TOLERANCE * largest)
        .collect();
    let rank = kept.len();
    let coefficients = if rank == m {
        // G^{-1/2}, symmetric
        let scaled = Mat::<f64>::from_fn(m, m, |i, k| vectors[(i, k)] / values[k].sqrt());
        &scaled * vectors.transpose()
    } else {
        Mat::<f64>::from_fn(rank, m, |r, pi| {
            vectors[(pi, kept[r])] / values[kept[r]].sqrt()
        })
    };
    Ok(GroundSpaceBasis {
        n,
        t,
        d,
        perms,
        gram_n,
        coefficients,
        rank,
    })
}

/// `‖A_{n,t} − G_{n,t}‖_∞`, computed as the largest `|λ − 1|` over the
/// nonzero spectrum of the tensor-power Gram matrix.
pub fn frame_operator_deviation(n: usize, t: usize, d: u64) -> Result<f64> {
    check_frame_t(t)?;
    if d < 2 || n == 0 {
        return param(format!("need d >= 2 and n >= 1 (got d = {d}, n = {n})"));
    }
    let perms = enumerate_group(t)?;
    let gram_n = powered_gram(&perms, d as f64, n as u32);
    let values = linalg::symmetric_eigenvalues(&gram_n)?;
    let largest = values.iter().fold(0.0f64, |a, &v| a.max(v));
    Ok(values
        .iter()
        .filter(|&&v| v > linalg::RANK_TOLERANCE * largest)
        .fold(0.0f64, |acc, &v| acc.max((v - 1.0).abs())))
}
