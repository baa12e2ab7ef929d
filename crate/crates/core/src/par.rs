//! Data-parallel fan-out over sample indices.
//!
//! Every Monte Carlo sample is a pure function of its index, so results are
//! collected in index order and reduced sequentially afterwards. The output is
//! therefore bit-identical for any worker count, and identical to the
//! sequential fallback used when the `parallel` feature is disabled.

/// Map `f` over `0..count`, in parallel when the `parallel` feature is on.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_sequential(count, f)
    }
}

/// Sequential reference path; always available (benches compare against it).
pub fn map_indexed_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Run `op` with at most `workers` threads. `None` uses the global pool.
///
/// Without the `parallel` feature this simply calls `op`.
pub fn with_workers<R, F>(workers: Option<usize>, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .expect("failed to build worker pool");
                pool.install(op)
            }
            None => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        op()
    }
}

/// Number of worker threads currently available.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
