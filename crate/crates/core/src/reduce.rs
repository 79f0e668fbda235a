//! Deterministic parallel summation.
//!
//! Floating-point addition is not associative, so a work-stealing reduction
//! can return different bits on different runs. Every O(N²) kernel sum in
//! this crate therefore goes through [`sum_indexed`]: the index range is cut
//! into fixed chunks, each chunk is reduced by a sequential pairwise tree,
//! and the chunk partials are combined pairwise in index order. The result
//! depends only on the inputs — not on thread count or scheduling — and the
//! pairwise tree keeps rounding error at O(log N) ulps instead of O(N).
//!
//! The non-deterministic path (`deterministic = false`) hands the terms to
//! rayon's unordered reduction; it exists so the cost of the ordering
//! guarantee stays measurable.

use rayon::prelude::*;

/// Chunk length for the parallel split. Large enough that per-chunk overhead
/// is negligible, small enough to keep all cores busy at N = 512.
const CHUNK: usize = 1024;

/// Pairwise (tree) sum of a slice; below this length, plain sequential
/// accumulation is exact enough and faster.
const PAIRWISE_LEAF: usize = 32;

/// Sum `f(0) + f(1) + … + f(count−1)` with a fixed reduction order when
/// `deterministic` is set.
pub fn sum_indexed<F>(count: usize, deterministic: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if count == 0 {
        return 0.0;
    }
    if deterministic {
        let chunks = count.div_ceil(CHUNK);
        if chunks == 1 {
            return pairwise_map(0, count, &f);
        }
        let partials: Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(count);
                pairwise_map(lo, hi, &f)
            })
            .collect();
        pairwise_sum(&partials)
    } else {
        (0..count).into_par_iter().map(f).sum()
    }
}

/// Pairwise tree sum of `f` over `[lo, hi)`, sequential.
fn pairwise_map<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
    let len = hi - lo;
    if len <= PAIRWISE_LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_map(lo, mid, f) + pairwise_map(mid, hi, f)
    }
}

/// Pairwise tree sum of a slice, sequential.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}
