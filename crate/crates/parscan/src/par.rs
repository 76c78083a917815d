//! Thin execution shim: with the `parallel` feature (default) these helpers
//! dispatch to rayon; without it they run plain sequential loops. Every
//! algorithm in this crate is written so both paths produce bit-identical
//! results, so the feature only changes wall-clock time.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ordered map over `0..len`.
pub fn map_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Ordered flat-map over `0..len`; the per-index chunks are concatenated in
/// index order.
pub fn flat_map_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().flat_map_iter(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).flat_map(f).collect()
    }
}

/// Side-effecting loop over `0..len`. Effects must be commutative (atomic
/// counters, disjoint writes) for the parallel path to stay deterministic.
pub fn for_each<F>(len: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().for_each(f);
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).for_each(f);
    }
}

/// Unstable sort; comparators in this crate are total orders over distinct
/// keys, so instability never shows.
pub fn sort_unstable_by<T, F>(items: &mut [T], cmp: F)
where
    T: Send,
    F: Fn(&T, &T) -> std::cmp::Ordering + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.par_sort_unstable_by(cmp);
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.sort_unstable_by(cmp);
    }
}

/// Runs `f` on a pool with the given number of worker threads (`None` keeps
/// the ambient pool). Without the `parallel` feature the thread count is
/// irrelevant and `f` just runs.
pub fn with_thread_count<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("failed to build thread pool")
                .install(f),
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Number of worker threads the current pool would use.
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
