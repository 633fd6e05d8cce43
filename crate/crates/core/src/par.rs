//! Deterministic data-parallel helpers.
//!
//! Work is split at fixed indices and reassembled in index order, so the
//! `parallel` feature never changes numeric results: each index computes the
//! same value either way, and reductions always fold in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sums per-index contributions, folding in index order regardless of how
/// the work was scheduled.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(n, f).into_iter().sum()
}

/// Runs `f` with the data-parallel helpers confined to a single thread,
/// which latency measurements rely on.
pub fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("a one-thread pool always builds")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_index_order() {
        let out = map_indexed(100, |i| i * i);
        assert_eq!(out.len(), 100);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * i);
        }
    }

    #[test]
    fn sum_matches_sequential_fold() {
        let vals: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let expected: f64 = vals.iter().sum();
        let got = sum_indexed(vals.len(), |i| vals[i]);
        assert_eq!(got, expected);
    }
}
