use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::permgroup::factorial;
use crate::reduce;
use crate::C64;

use super::{apply_two_qudit, gate_table, qudit_dim, sample_circuit, CircuitSample, Model};

/// Frame potentials materialize `d^n`-dimensional unitaries; `n log₂ d ≤ 12`.
pub const FRAME_POTENTIAL_DIM_LIMIT: usize = 1 << 12;
pub const FRAME_POTENTIAL_MAX_T: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub model: String,
    pub n: usize,
    pub d: usize,
    pub steps: usize,
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub params: EstimatorParams,
    /// `t!`, the Haar frame potential, when `d^n ≥ t`.
    pub haar_reference: Option<f64>,
}

/// Haar value of `E|tr(U†V)|^{2t}` on `U(dim)`, known in closed form when
/// `dim ≥ t`.
pub fn haar_frame_potential(dim: u128, t: usize) -> Option<f64> {
    (dim >= t as u128).then(|| factorial(t) as f64)
}

/// `tr(U†V)` for two circuits, by running `U†V` on every basis state.
fn trace_overlap(u: &CircuitSample, v: &CircuitSample, dim: usize) -> C64 {
    let d = u.d;
    let v_tables: Vec<(usize, Vec<C64>)> = v
        .gates
        .iter()
        .map(|g| (g.site - 1, gate_table(&g.unitary)))
        .collect();
    let u_adjoint: Vec<(usize, Vec<C64>)> = u
        .gates
        .iter()
        .rev()
        .map(|g| (g.site - 1, gate_table(&g.unitary.adjoint().to_owned())))
        .collect();
    let mut state = vec![C64::new(0.0, 0.0); dim];
    let mut trace = C64::new(0.0, 0.0);
    for k in 0..dim {
        state.fill(C64::new(0.0, 0.0));
        state[k] = C64::new(1.0, 0.0);
        for (site, table) in v_tables.iter().chain(u_adjoint.iter()) {
            apply_two_qudit(&mut state, d, *site, table, false);
        }
        trace += state[k];
    }
    trace
}

/// Mean and standard error of `|tr(U†V)|^{2t}` over independent circuit
/// pairs. Sample `i` draws `U` from stream `2i` and `V` from stream `2i + 1`.
pub fn frame_potential(
    model: &Model,
    n: usize,
    d: usize,
    steps: usize,
    t: usize,
    samples: usize,
    seed: u64,
) -> Result<EstimatorResult> {
    let dim = qudit_dim(n, d, FRAME_POTENTIAL_DIM_LIMIT)?;
    if t == 0 || t > FRAME_POTENTIAL_MAX_T {
        return param(format!("t = {t} outside 1..={FRAME_POTENTIAL_MAX_T}"));
    }
    if samples < 2 {
        return param(format!("need at least two samples, got {samples}"));
    }
    if matches!(model, Model::Plr) && n % 2 == 1 {
        return param(format!("parallel walk needs an even number of sites, got n = {n}"));
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let u = sample_circuit(model, n, d, steps, seed, 2 * i)?;
            let v = sample_circuit(model, n, d, steps, seed, 2 * i + 1)?;
            Ok(trace_overlap(&u, &v, dim).norm_sqr().powi(t as i32))
        })
        .collect::<Result<_>>()?;
    let m = samples as f64;
    let estimate = reduce::sum(&values) / m;
    let squares: Vec<f64> = values.iter().map(|x| (x - estimate) * (x - estimate)).collect();
    let variance = reduce::sum(&squares) / (m - 1.0);
    Ok(EstimatorResult {
        estimate,
        std_error: (variance / m).sqrt(),
        samples,
        seed,
        params: EstimatorParams {
            model: model.name().to_string(),
            n,
            d,
            steps,
            t,
        },
        haar_reference: haar_frame_potential((d as u128).pow(n as u32), t),
    })
}
