//! Data-parallel map with a sequential fallback.
//!
//! Heavy inner loops (Monte Carlo trials, tree labelling) are expressed as
//! index-order maps. With the default `parallel` feature they run on rayon;
//! without it they run sequentially. Results are collected in index order
//! either way, so outputs are identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}
