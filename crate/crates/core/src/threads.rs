//! Shared rayon pool for assembly parallelism, capped by the
//! `WAVEBEM_THREADS` environment variable.

use once_cell::sync::Lazy;
use rayon::ThreadPool;

static POOL: Lazy<ThreadPool> = Lazy::new(|| {
    let threads = std::env::var("WAVEBEM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool")
});

/// The process-wide assembly pool.
pub fn pool() -> &'static ThreadPool {
    &POOL
}
