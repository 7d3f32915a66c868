//! Data-parallel dispatch.
//!
//! With the `parallel` feature (default) the helpers fan work out over rayon;
//! without it they run plain sequential loops. Results are collected in index
//! order and every work unit derives its own random stream, so both modes and
//! any thread count produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to each index in `0..n`, collecting in index order.
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

/// Apply `f` to each element of `items`, collecting in input order.
pub fn map_items<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
