//! Monte Carlo engine for random nearest-neighbour circuits on `n` qudits.
//!
//! Three walks are supported:
//!
//! * `Lr`: each step applies one Haar gate to a uniformly random pair,
//! * `Plr`: each step is one layer, with probability ½ a Haar gate on every
//!   pair `(1,2),(3,4),…` and otherwise on every pair `(2,3),(4,5),…`,
//! * `GLocal`: like `Lr`, but gates are drawn uniformly from a finite set.
//!
//! Randomness comes from ChaCha8 streams keyed by `(seed, stream)`, so each
//! Monte Carlo sample owns its own stream and results do not depend on how
//! samples are scheduled over threads.

mod estimator;
mod gates;
mod tqo;

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::C64;

pub use estimator::{
    frame_potential, haar_frame_potential, EstimatorParams, EstimatorResult, FRAME_POTENTIAL_DIM_LIMIT,
    FRAME_POTENTIAL_MAX_T,
};
pub use gates::{sample_haar_gate, stream_rng, unitarity_defect, GateSet, GATE_FILE_TOLERANCE};
pub use tqo::{default_pair, tqo_experiment, TqoRecord};

/// Largest single-copy state (`d^n` amplitudes) the simulator will allocate.
pub const MAX_QUDIT_DIM: usize = 1 << 26;

#[derive(Clone, Debug)]
pub enum Model {
    Lr,
    Plr,
    GLocal(Arc<GateSet>),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Lr => "lr",
            Model::Plr => "plr",
            Model::GLocal(_) => "gset",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate of a sampled circuit, acting on sites `site` and `site + 1`
/// (1-based, so `site ∈ [1, n−1]`).
#[derive(Clone, Debug)]
pub struct PlacedGate {
    pub step: usize,
    pub site: usize,
    pub unitary: Mat<C64>,
}

#[derive(Clone, Debug)]
pub struct CircuitSample {
    pub model: Model,
    pub n: usize,
    pub d: usize,
    pub steps: usize,
    pub seed: u64,
    pub stream: u64,
    pub gates: Vec<PlacedGate>,
}

/// Validates `(n, d)` and returns `d^n`.
pub(crate) fn qudit_dim(n: usize, d: usize, limit: usize) -> Result<usize> {
    if n < 2 {
        return param(format!("need at least two qudits, got n = {n}"));
    }
    if d < 2 {
        return param(format!("local dimension d = {d} must be at least 2"));
    }
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > limit as u128 {
        return Err(Error::Guard {
            what: format!("{n} qudits of dimension {d}"),
            required: dim,
            limit: limit as u128,
        });
    }
    Ok(dim as usize)
}

/// Samples a circuit of `steps` steps from stream `stream` of `seed`.
///
/// For `Plr` a step is one layer; a layer touches `⌊n/2⌋` pairs when odd
/// and `n/2 − 1` pairs when even.
pub fn sample_circuit(model: &Model, n: usize, d: usize, steps: usize, seed: u64, stream: u64) -> Result<CircuitSample> {
    if n < 2 || d < 2 {
        return param(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}"));
    }
    let q = d * d;
    let mut rng = stream_rng(seed, stream);
    let mut gates = Vec::new();
    match model {
        Model::Lr => {
            for step in 0..steps {
                let site = rng.random_range(1..n);
                let unitary = sample_haar_gate(q, &mut rng)?;
                gates.push(PlacedGate { step, site, unitary });
            }
        }
        Model::Plr => {
            if n % 2 == 1 {
                return param(format!("parallel walk needs an even number of sites, got n = {n}"));
            }
            for step in 0..steps {
                let first = if rng.random_bool(0.5) { 1 } else { 2 };
                for site in (first..n).step_by(2) {
                    let unitary = sample_haar_gate(q, &mut rng)?;
                    gates.push(PlacedGate { step, site, unitary });
                }
            }
        }
        Model::GLocal(set) => {
            if set.d() != d {
                return param(format!("gate set acts on d = {}, circuit has d = {d}", set.d()));
            }
            for step in 0..steps {
                let site = rng.random_range(1..n);
                let k = rng.random_range(0..set.len());
                gates.push(PlacedGate {
                    step,
                    site,
                    unitary: set.gates()[k].clone(),
                });
            }
        }
    }
    Ok(CircuitSample {
        model: model.clone(),
        n,
        d,
        steps,
        seed,
        stream,
        gates,
    })
}

/// Pure state of `n` qudits; qudit `k` contributes `s_k · d^k` to the index.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    pub n: usize,
    pub d: usize,
    pub amplitudes: Vec<C64>,
}

impl QuditState {
    pub fn product(n: usize, d: usize, digits: &[usize]) -> Result<Self> {
        let dim = qudit_dim(n, d, MAX_QUDIT_DIM)?;
        if digits.len() != n || digits.iter().any(|&s| s >= d) {
            return param(format!("product state needs {n} digits below {d}"));
        }
        let index = digits.iter().rev().fold(0, |acc, &s| acc * d + s);
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { n, d, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        crate::reduce::norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn inner(&self, other: &QuditState) -> C64 {
        crate::reduce::inner(&self.amplitudes, &other.amplitudes)
    }
}

/// Row-major copy of a `q × q` gate.
fn gate_table(u: &Mat<C64>) -> Vec<C64> {
    let q = u.nrows();
    (0..q * q).map(|k| u[(k / q, k % q)]).collect()
}

/// Applies the gate to one block of `low · q` amplitudes in which the two
/// active qudits are the slow index.
fn apply_block(block: &mut [C64], low: usize, table: &[C64], local: &mut [C64]) {
    let q = local.len();
    for l in 0..low {
        for (x, slot) in local.iter_mut().enumerate() {
            *slot = block[l + low * x];
        }
        for r in 0..q {
            let row = &table[r * q..(r + 1) * q];
            let mut acc = C64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(local.iter()) {
                acc += a * b;
            }
            block[l + low * r] = acc;
        }
    }
}

/// Applies `u` (a `d² × d²` matrix on local index `s_i + d·s_{i+1}`) to
/// 0-based qudits `i, i+1`.
fn apply_two_qudit(amps: &mut [C64], d: usize, i: usize, table: &[C64], parallel: bool) {
    let q = d * d;
    let low = d.pow(i as u32);
    let chunk = low * q;
    if parallel {
        amps.par_chunks_mut(chunk)
            .with_min_len((1 << 12) / chunk + 1)
            .for_each_init(|| vec![C64::new(0.0, 0.0); q], |local, block| {
                apply_block(block, low, table, local)
            });
    } else {
        let mut local = vec![C64::new(0.0, 0.0); q];
        for block in amps.chunks_mut(chunk) {
            apply_block(block, low, table, &mut local);
        }
    }
}

/// Runs the circuit on `initial`, gates in order.
pub fn simulate_statevector(c: &CircuitSample, initial: &QuditState) -> Result<QuditState> {
    if initial.n != c.n || initial.d != c.d {
        return param(format!(
            "state on ({}, {}) but circuit on ({}, {})",
            initial.n, initial.d, c.n, c.d
        ));
    }
    qudit_dim(c.n, c.d, MAX_QUDIT_DIM)?;
    let mut state = initial.clone();
    for g in &c.gates {
        apply_two_qudit(&mut state.amplitudes, c.d, g.site - 1, &gate_table(&g.unitary), true);
    }
    Ok(state)
}

/// The full `d^n × d^n` unitary of a circuit, column by column.
pub fn circuit_unitary(c: &CircuitSample, guard: usize) -> Result<Mat<C64>> {
    let dim = qudit_dim(c.n, c.d, guard)?;
    // column-major storage: each column is an independent state
    let mut cols = vec![C64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        cols[k * dim + k] = C64::new(1.0, 0.0);
    }
    for g in &c.gates {
        let table = gate_table(&g.unitary);
        cols.par_chunks_mut(dim)
            .for_each(|col| apply_two_qudit(col, c.d, g.site - 1, &table, false));
    }
    Ok(Mat::from_fn(dim, dim, |i, j| cols[j * dim + i]))
}
