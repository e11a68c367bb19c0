//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers run on the current rayon pool;
//! without it they are plain loops. Callers never see the difference, and
//! every helper produces bit-identical results in both modes: chunk
//! boundaries are fixed and reductions are merged in chunk order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{MmdError, Result};

/// Elements per work unit for pointwise kernels.
pub const CHUNK: usize = 4096;

/// Applies `f(offset, chunk)` to consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(i, chunk)| f(i * CHUNK, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(i, chunk)| f(i * CHUNK, chunk));
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Folds fixed-size index ranges `[start, end)` of `0..len` into partial
/// results, returned in range order.
pub fn fold_ranges<R, F>(len: usize, range: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, usize) -> R + Sync + Send,
{
    let count = len.div_ceil(range.max(1));
    let bounds = |i: usize| (i * range, ((i + 1) * range).min(len));
    #[cfg(feature = "parallel")]
    {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let (a, b) = bounds(i);
                f(a, b)
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count)
            .map(|i| {
                let (a, b) = bounds(i);
                f(a, b)
            })
            .collect()
    }
}

/// Number of worker threads available to the helpers.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Caps the global worker pool at `threads`. Must run before any parallel
/// work; a second call fails.
pub fn limit_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(MmdError::InvalidParameter("thread count must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| MmdError::InvalidParameter(format!("thread pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(())
    }
}
