//! Reductions whose rounding does not depend on the thread count.
//!
//! Every sum over a grid is split into fixed rows. Each row is summed
//! pairwise on its own, possibly on different threads, and the row partials
//! are then combined pairwise in row order. The tree is a function of the
//! grid shape alone, so the result is bit-identical for any rayon pool size.

use rayon::prelude::*;

const BLOCK: usize = 8;

/// Pairwise sum of `term(k)` for `k` in `lo..hi`.
pub fn pairwise<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    let len = hi - lo;
    if len <= BLOCK {
        let mut acc = 0.0;
        for k in lo..hi {
            acc += term(k);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise(lo, mid, term) + pairwise(mid, hi, term)
    }
}

pub fn pairwise_slice(values: &[f64]) -> f64 {
    pairwise(0, values.len(), &|k| values[k])
}

/// Row-major deterministic sum of `term(flat_index)` over a `rows x row_len`
/// array.
pub fn grid_sum<F>(rows: usize, row_len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let base = r * row_len;
            pairwise(base, base + row_len, &term)
        })
        .collect();
    pairwise_slice(&partials)
}

/// `sum_k w[k] * a[k] * b[k]` over a grid.
pub fn weighted_dot(rows: usize, row_len: usize, w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), rows * row_len);
    grid_sum(rows, row_len, |k| w[k] * a[k] * b[k])
}

/// Plain dot product over a grid, no weights.
pub fn dot(rows: usize, row_len: usize, a: &[f64], b: &[f64]) -> f64 {
    grid_sum(rows, row_len, |k| a[k] * b[k])
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
