use std::path::Path;

use faer::Mat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::linalg;
use crate::C64;

/// Tolerance for accepting user-supplied gates before re-orthonormalization.
pub const GATE_FILE_TOLERANCE: f64 = 1e-8;

/// Independent random stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Haar-distributed `q × q` unitary.
///
/// QR-decomposes a complex Ginibre matrix and multiplies column `j` of `Q`
/// by the phase of `R_jj`, so that `R` effectively has a positive diagonal
/// and the factorization is unique.
pub fn sample_haar_gate<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<Mat<C64>> {
    if q < 2 {
        return param(format!("gate dimension q = {q} must be at least 2"));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut ginibre = Mat::<C64>::zeros(q, q);
    for j in 0..q {
        for i in 0..q {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            ginibre[(i, j)] = C64::new(re * scale, im * scale);
        }
    }
    let qr = ginibre.qr();
    let mut unitary = qr.compute_thin_Q();
    let r = qr.thin_R();
    for j in 0..q {
        let rjj = r[(j, j)];
        let abs = rjj.norm();
        let phase = if abs > 0.0 { rjj / abs } else { C64::new(1.0, 0.0) };
        for i in 0..q {
            unitary[(i, j)] *= phase;
        }
    }
    Ok(unitary)
}

/// Spectral norm of `U†U − I`.
pub fn unitarity_defect(u: &Mat<C64>) -> f64 {
    let q = u.nrows();
    let mut gram = u.adjoint() * u;
    for i in 0..q {
        gram[(i, i)] -= C64::new(1.0, 0.0);
    }
    linalg::singular_values(&gram)
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::INFINITY)
}

/// Nearest unitary in Frobenius norm (polar factor `W V†` of `A = W Σ V†`).
fn polar_unitary(a: &Mat<C64>) -> Result<Mat<C64>> {
    let svd = a.svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    Ok(svd.U() * svd.V().adjoint())
}

/// A finite gate set for the G-local walk; every gate acts on `ℂ^d ⊗ ℂ^d`.
#[derive(Clone, Debug)]
pub struct GateSet {
    d: usize,
    gates: Vec<Mat<C64>>,
}

impl GateSet {
    pub fn new(gates: Vec<Mat<C64>>) -> Result<Self> {
        let Some(first) = gates.first() else {
            return Err(Error::Format("gate set is empty".into()));
        };
        let q = first.nrows();
        let d = (q as f64).sqrt().round() as usize;
        if d < 2 || d * d != q {
            return Err(Error::Format(format!(
                "gate dimension {q} is not d^2 for an integer d >= 2"
            )));
        }
        let mut cleaned = Vec::with_capacity(gates.len());
        for (k, g) in gates.iter().enumerate() {
            if g.nrows() != q || g.ncols() != q {
                return Err(Error::Format(format!(
                    "gate {k} is {}x{}, expected {q}x{q}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            let defect = unitarity_defect(g);
            if defect.is_nan() || defect > GATE_FILE_TOLERANCE {
                return Err(Error::Format(format!(
                    "gate {k} is not unitary (defect {defect:e})"
                )));
            }
            cleaned.push(polar_unitary(g)?);
        }
        Ok(Self { d, gates: cleaned })
    }

    /// Parses a JSON array of matrices, each a row-major list of `q²`
    /// `[re, im]` pairs.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<Vec<[f64; 2]>> =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("gate file: {e}")))?;
        let mut gates = Vec::with_capacity(raw.len());
        for (k, entries) in raw.iter().enumerate() {
            let q = (entries.len() as f64).sqrt().round() as usize;
            if q * q != entries.len() || q == 0 {
                return Err(Error::Format(format!(
                    "gate {k} has {} entries, not a perfect square",
                    entries.len()
                )));
            }
            gates.push(Mat::from_fn(q, q, |i, j| {
                let [re, im] = entries[i * q + j];
                C64::new(re, im)
            }));
        }
        Self::new(gates)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Inverse of [`GateSet::from_json`].
    pub fn to_json(&self) -> String {
        let raw: Vec<Vec<[f64; 2]>> = self
            .gates
            .iter()
            .map(|g| {
                let q = g.nrows();
                (0..q * q)
                    .map(|k| {
                        let z = g[(k / q, k % q)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&raw).expect("finite floats serialize")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gates(&self) -> &[Mat<C64>] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}
