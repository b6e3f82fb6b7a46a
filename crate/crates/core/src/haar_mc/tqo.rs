//! Local indistinguishability of two evolved orthogonal states.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::linalg::trace_norm;
use crate::C64;

use super::{qudit_dim, sample_circuit, simulate_statevector, Model, QuditState, MAX_QUDIT_DIM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TqoRecord {
    pub n: usize,
    pub d: usize,
    pub steps: usize,
    pub l: usize,
    pub seed: u64,
    /// Regions examined: all contiguous runs of `1..=l` sites.
    pub regions: usize,
    /// `max_X ‖tr_{∖X}(Uψ₀ψ₀†U†) − τ_X‖₁`
    pub max_deviation_0: f64,
    pub max_deviation_1: f64,
    /// `max_X ‖tr_{∖X}(Uψ₀ψ₁†U†)‖₁`
    pub max_cross: f64,
    /// `2^{−n/8}`
    pub threshold: f64,
    pub within_threshold: bool,
    /// `l ≤ n/4`, the regime in which the threshold is claimed.
    pub in_claimed_regime: bool,
}

/// `|0…0⟩` and `|(d−1)…(d−1)⟩`.
pub fn default_pair(n: usize, d: usize) -> Result<(QuditState, QuditState)> {
    Ok((
        QuditState::product(n, d, &vec![0; n])?,
        QuditState::product(n, d, &vec![d - 1; n])?,
    ))
}

/// Reshapes `ψ` into `d^len × d^{n−len}` with the region as row index.
fn region_matrix(psi: &[C64], d: usize, start: usize, len: usize, n: usize) -> Mat<C64> {
    let low = d.pow(start as u32);
    let mid = d.pow(len as u32);
    let high = d.pow((n - start - len) as u32);
    Mat::from_fn(mid, low * high, |m, col| {
        let (h, lo) = (col / low, col % low);
        psi[lo + low * m + low * mid * h]
    })
}

/// Samples one parallel circuit of `steps` layers from `seed` and measures
/// how well every region of at most `l` sites distinguishes `Uψ₀` from `Uψ₁`.
pub fn tqo_experiment(
    n: usize,
    d: usize,
    steps: usize,
    l: usize,
    seed: u64,
    psi0: &QuditState,
    psi1: &QuditState,
) -> Result<TqoRecord> {
    qudit_dim(n, d, MAX_QUDIT_DIM)?;
    if l == 0 || l >= n {
        return param(format!("region length l = {l} must lie in 1..{n}"));
    }
    for psi in [psi0, psi1] {
        if psi.n != n || psi.d != d {
            return param("initial state does not match (n, d)");
        }
        if (psi.norm() - 1.0).abs() > 1e-10 {
            return param("initial states must be normalized");
        }
    }
    if psi0.inner(psi1).norm() > 1e-10 {
        return param("initial states must be orthogonal");
    }
    let circuit = sample_circuit(&Model::Plr, n, d, steps, seed, 0)?;
    let out0 = simulate_statevector(&circuit, psi0)?;
    let out1 = simulate_statevector(&circuit, psi1)?;

    let (mut dev0, mut dev1, mut cross) = (0.0f64, 0.0f64, 0.0f64);
    let mut regions = 0;
    for len in 1..=l {
        let mid = d.pow(len as u32);
        let mixed = C64::new(1.0 / mid as f64, 0.0);
        for start in 0..=n - len {
            regions += 1;
            let a0 = region_matrix(&out0.amplitudes, d, start, len, n);
            let a1 = region_matrix(&out1.amplitudes, d, start, len, n);
            let mut rho0 = &a0 * a0.adjoint();
            let mut rho1 = &a1 * a1.adjoint();
            for k in 0..mid {
                rho0[(k, k)] -= mixed;
                rho1[(k, k)] -= mixed;
            }
            dev0 = dev0.max(trace_norm(&rho0)?);
            dev1 = dev1.max(trace_norm(&rho1)?);
            cross = cross.max(trace_norm(&(&a0 * a1.adjoint()))?);
        }
    }
    let threshold = 2f64.powf(-(n as f64) / 8.0);
    Ok(TqoRecord {
        n,
        d,
        steps,
        l,
        seed,
        regions,
        max_deviation_0: dev0,
        max_deviation_1: dev1,
        max_cross: cross,
        threshold,
        within_threshold: dev0 <= threshold && dev1 <= threshold && cross <= threshold,
        in_claimed_regime: 4 * l <= n,
    })
}
