//! Order-preserving fan-out over sample points.

use rayon::prelude::*;

/// Maps `f` over `items` on up to `workers` threads. Output order always
/// matches input order, so downstream aggregation is worker-count independent.
pub fn parallel_map<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()),
        Err(_) => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}
