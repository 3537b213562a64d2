//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it every loop runs on the calling thread. Results are identical
//! either way: partial aggregates are exact integers or are combined in a
//! fixed index order.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Folds `0..n` into accumulators and merges them. `combine` must be
/// associative and commutative for the result to be schedule independent.
pub(crate) fn fold_reduce<T, I, F, C>(exec: Execution, n: usize, identity: I, fold: F, combine: C) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, usize) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(not(feature = "parallel"))]
    let _ = combine;
    match exec {
        Execution::Sequential => (0..n).fold(identity(), fold),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().fold(&identity, &fold).reduce(&identity, &combine)
        }
    }
}

/// Maps `0..n`, returning results in index order.
pub(crate) fn map_ordered<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// Sets the size of the global worker pool. Returns `false` when the pool was
/// already initialised or parallelism is compiled out.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}
