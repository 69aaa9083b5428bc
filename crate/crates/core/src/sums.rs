//! Deterministic reductions.
//!
//! Every statistic in this crate is reduced in a fixed order so that results
//! are bit-identical across runs and thread counts. Two reduction rules are
//! used:
//!
//! * [`pairwise_sum`] — recursive halving with a small left-folded base block.
//!   Used for means, moments, RMSE and the shared interaction sums. Lower
//!   rounding error than a naive left fold at `N = 10^4`.
//! * [`tree_sum_pow2`] — strict binary tree over power-of-two blocks, base
//!   case a single element. Used for Brownian block sums, where it makes the
//!   coarsening identity `coarse_l[n] == coarse_{l+1}[2n] + coarse_{l+1}[2n+1]`
//!   hold bit-exactly.

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (tree) sum with a fixed split rule: split at `len/2`, left-fold
/// blocks of at most 32 elements.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise sum of `f(x)` over a slice, same reduction order as
/// [`pairwise_sum`], without allocating the mapped values.
pub(crate) fn pairwise_map_sum<F: Fn(f64) -> f64>(xs: &[f64], f: &F) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        xs.iter().map(|&x| f(x)).sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_map_sum(&xs[..mid], f) + pairwise_map_sum(&xs[mid..], f)
    }
}

/// Strict binary-tree sum of a power-of-two-length slice.
pub(crate) fn tree_sum_pow2(xs: &[f64]) -> f64 {
    debug_assert!(xs.len().is_power_of_two());
    match xs.len() {
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            tree_sum_pow2(&xs[..mid]) + tree_sum_pow2(&xs[mid..])
        }
    }
}
