//! Sparse contraction kernel for the two-site Haar projector.
//!
//! On a block of two neighbouring sites the projector is
//! `P = Σ_{π,σ} W[π][σ] |ψ_π⟩⟨ψ_σ|` with `W` the dual-frame matrix at
//! `q = d²`. Each `|ψ_π,d²⟩` factorizes as `|ψ_π,d⟩ ⊗ |ψ_π,d⟩` over the two
//! sites and has exactly `d^{2t}` nonzero amplitudes, all equal to `d^{-t}`.
//! For every fiber (fixed indices on all other sites) the kernel therefore
//! reads `t!·d^{2t}` entries, mixes `t!` coefficients through `W`, and writes
//! `t!·d^{2t}` entries back.

use rayon::prelude::*;

use crate::permgroup::{FrameData, Permutation};
use crate::C64;

use super::state::Shape;

/// Local indices `x` in `0..d^{2t}` where `ψ_π,d` is nonzero: the conjugate
/// leg `π(k)` carries the same value as the forward leg `k`.
pub fn single_site_support(pi: &Permutation, d: usize) -> Vec<usize> {
    let t = pi.degree();
    let count = d.pow(t as u32);
    let powers: Vec<usize> = (0..2 * t).map(|k| d.pow(k as u32)).collect();
    (0..count)
        .map(|mut f| {
            let mut index = 0;
            for k in 0..t {
                let value = f % d;
                f /= d;
                index += value * powers[k] + value * powers[t + pi.apply(k)];
            }
            index
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BlockKernel {
    t: usize,
    d: usize,
    site_dim: usize,
    /// Per frame permutation, sorted block indices `a + D·b` of its support.
    supports: Vec<Vec<usize>>,
    /// Per block index, the permutations whose support contains it.
    members: Vec<Vec<u16>>,
    /// `W[π][σ]` row-major.
    dual: Vec<f64>,
    /// Nonzero amplitude of a two-site frame vector, `d^{-t}`.
    amp: f64,
}

impl BlockKernel {
    pub fn new(frame: &FrameData, d: usize) -> Self {
        let t = frame.t();
        let site_dim = d.pow(2 * t as u32);
        let m = frame.len();
        let supports: Vec<Vec<usize>> = frame
            .permutations()
            .iter()
            .map(|pi| {
                let single = single_site_support(pi, d);
                let mut block: Vec<usize> = single
                    .iter()
                    .flat_map(|&b| single.iter().map(move |&a| a + site_dim * b))
                    .collect();
                block.sort_unstable();
                block
            })
            .collect();
        let mut members = vec![Vec::new(); site_dim * site_dim];
        for (p, support) in supports.iter().enumerate() {
            for &j in support {
                members[j].push(p as u16);
            }
        }
        let dual_mat = frame.dual();
        let dual = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| dual_mat[(i, j)])
            .collect();
        Self {
            t,
            d,
            site_dim,
            supports,
            members,
            dual,
            amp: (d as f64).powi(-(t as i32)),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn amplitude(&self) -> f64 {
        self.amp
    }

    /// Dense two-site amplitude table of `|ψ_π,d²⟩` (length `d^{4t}`).
    pub fn block_state(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.site_dim * self.site_dim];
        for &j in &self.supports[p] {
            out[j] = self.amp;
        }
        out
    }

    /// `out += scale · P_{site,site+1} v`, with `site` 0-based.
    pub fn accumulate(&self, shape: Shape, site: usize, v: &[C64], out: &mut [C64], scale: f64) {
        assert!(site + 1 < shape.n, "pair ({site}, {}) outside chain", site + 1);
        let dd = self.site_dim;
        let low_count = dd.pow(site as u32);
        let block = dd * dd;
        let high_stride = low_count * block;
        let fibers = v.len() / block;
        let m = self.supports.len();
        let weight = self.amp * self.amp * scale;

        // fiber = high * low_count + low; coefficients of each frame vector
        let mut coef = vec![C64::new(0.0, 0.0); fibers * m];
        coef.par_chunks_mut(m).enumerate().for_each(|(fiber, c)| {
            let high = fiber / low_count;
            let low = fiber % low_count;
            let base = high * high_stride + low;
            let mut raw = [C64::new(0.0, 0.0); 64];
            let mut raw_heap;
            let raw: &mut [C64] = if m <= 64 {
                &mut raw[..m]
            } else {
                raw_heap = vec![C64::new(0.0, 0.0); m];
                &mut raw_heap
            };
            for (sigma, support) in self.supports.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &j in support {
                    acc += v[base + j * low_count];
                }
                raw[sigma] = acc;
            }
            for (pi, slot) in c.iter_mut().enumerate() {
                let row = &self.dual[pi * m..(pi + 1) * m];
                let mut acc = C64::new(0.0, 0.0);
                for (w, r) in row.iter().zip(raw.iter()) {
                    acc += r * *w;
                }
                *slot = acc * weight;
            }
        });

        // each output chunk (high, j) holds all `low` values for one block index
        out.par_chunks_mut(low_count)
            .with_min_len((4096 / low_count).max(1))
            .enumerate()
            .for_each(|(chunk, slice)| {
                let high = chunk / block;
                let j = chunk % block;
                let members = &self.members[j];
                if members.is_empty() {
                    return;
                }
                let fiber_base = high * low_count;
                for (low, slot) in slice.iter_mut().enumerate() {
                    let c = &coef[(fiber_base + low) * m..(fiber_base + low + 1) * m];
                    let mut acc = C64::new(0.0, 0.0);
                    for &p in members {
                        acc += c[p as usize];
                    }
                    *slot += acc;
                }
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::{build_frame, enumerate_group, overlap};

    #[test]
    fn support_sizes() {
        for pi in enumerate_group(3).unwrap() {
            let s = single_site_support(&pi, 2);
            assert_eq!(s.len(), 8);
            let mut u = s.clone();
            u.sort_unstable();
            u.dedup();
            assert_eq!(u.len(), 8);
        }
    }

    #[test]
    fn identity_support_is_diagonal() {
        // t = 1: |ψ_e⟩ ∝ |00⟩ + |11⟩ with leg 0 forward, leg 1 conjugate
        let s = single_site_support(&Permutation::identity(1), 2);
        assert_eq!(s, vec![0, 3]);
    }

    #[test]
    fn table_overlaps_match_cycle_formula() {
        // independent check: count common support points of the amplitude tables
        for t in 1..=3 {
            for d in 2..=3usize {
                let perms = enumerate_group(t).unwrap();
                let amp2 = (d as f64).powi(-(t as i32));
                for a in &perms {
                    let sa = single_site_support(a, d);
                    for b in &perms {
                        let sb = single_site_support(b, d);
                        let common = sa.iter().filter(|x| sb.contains(x)).count();
                        let from_tables = common as f64 * amp2;
                        let formula = overlap(a, b, d as u64).unwrap();
                        assert!((from_tables - formula).abs() < 1e-14, "t={t} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn block_states_are_normalized() {
        let frame = build_frame(2, 4).unwrap();
        let k = BlockKernel::new(&frame, 2);
        for p in 0..2 {
            let s = k.block_state(p);
            let norm: f64 = s.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }
}
