//! Worker-count scoped execution.

/// Runs `f` on a dedicated rayon pool of `workers` threads (at least one).
/// Results never depend on the worker count: callers only use
/// order-preserving collects and commutative reductions inside.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(f)
}
