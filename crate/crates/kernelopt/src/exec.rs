//! Executors for trajectory batches.

use anyhow::{Context, Result};
use kernelopt_core::algorithm::{Executor, Serial};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Serial for one thread, otherwise a dedicated rayon pool. Results are
/// always returned in index order, so output does not depend on the choice.
pub enum Runner {
    Serial,
    Parallel(ThreadPool),
}

impl Runner {
    /// `threads == 0` uses every available core.
    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads == 1 {
            return Ok(Runner::Serial);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building the worker pool")?;
        Ok(Runner::Parallel(pool))
    }

    pub fn threads(&self) -> usize {
        match self {
            Runner::Serial => 1,
            Runner::Parallel(pool) => pool.current_num_threads(),
        }
    }
}

impl Executor for Runner {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Runner::Serial => Serial.map_indexed(count, f),
            Runner::Parallel(pool) => pool.install(|| (0..count).into_par_iter().map(f).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_keeps_index_order() {
        let r = Runner::with_threads(4).unwrap();
        assert_eq!(r.threads(), 4);
        let out = r.map_indexed(1000, |i| i * 2);
        assert_eq!(out, (0..1000).map(|i| i * 2).collect::<Vec<_>>());
        assert!(matches!(Runner::with_threads(1).unwrap(), Runner::Serial));
    }
}
