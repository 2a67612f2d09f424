//! Parallel-or-sequential iteration, in one place.
//!
//! Grid sweeps in this crate are pure per-point maps, so parallel and
//! sequential execution produce bit-identical vectors (`collect` keeps index
//! order).  Public entry points that use these helpers expose `*_serial`
//! twins which bypass rayon unconditionally; the benchmark suite compares
//! the two.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// Sequential twin of [`map_indexed`].
pub(crate) fn map_indexed_serial<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
