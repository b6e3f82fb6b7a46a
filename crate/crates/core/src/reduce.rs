//! Fixed-order reductions.
//!
//! Sums are split into fixed-size chunks, each chunk is summed sequentially
//! and the chunk totals are combined by a pairwise tree. The grouping depends
//! only on the input length, so results are bit-identical for any number of
//! rayon threads.

use rayon::prelude::*;

use crate::C64;

const CHUNK: usize = 1 << 12;

fn tree_sum<T: Copy + std::ops::Add<Output = T>>(mut xs: Vec<T>, zero: T) -> T {
    if xs.is_empty() {
        return zero;
    }
    while xs.len() > 1 {
        let next: Vec<T> = xs
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
        xs = next;
    }
    xs[0]
}

/// `Σ conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    let partial: Vec<C64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).fold(C64::new(0.0, 0.0), |acc, (u, v)| acc + u.conj() * v))
        .collect();
    tree_sum(partial, C64::new(0.0, 0.0))
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    tree_sum(partial, 0.0)
}

/// Pairwise sum of an ordered list of reals.
pub fn sum(values: &[f64]) -> f64 {
    let partial: Vec<f64> = values.chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    tree_sum(partial, 0.0)
}
