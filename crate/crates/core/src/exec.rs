//! Worker parallelism.
//!
//! All parallel loops go through [`par_map`], which preserves input order in
//! its output. Callers seed each work item independently, so results do not
//! depend on the number of workers.

use rayon::prelude::*;

/// Environment variable capping worker threads; `0` means sequential.
pub const THREADS_ENV: &str = "IDS_THREADS";

pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps over `0..n` in parallel, output in index order.
pub fn par_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Runs `op` on a dedicated pool. `threads == 0` runs everything on a single
/// worker, i.e. sequentially.
pub fn with_threads<R, F>(threads: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(op)
}

/// Thread cap from `IDS_THREADS`, if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}

/// Runs `op` under the `IDS_THREADS` cap, or on the default pool when unset.
pub fn with_env_threads<R, F>(op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads_from_env() {
        Some(n) => with_threads(n, op),
        None => op(),
    }
}
