//! Worker handle for the partition-and-reduce enumerations.

use std::ops::Range;

use rayon::prelude::*;

/// Number of workers for exhaustive enumerations. Results never depend on it:
/// every reduction is exact integer addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(usize);

impl Workers {
    pub fn new(threads: usize) -> Self {
        Workers(threads.max(1))
    }

    pub fn single() -> Self {
        Workers(1)
    }

    pub fn count(&self) -> usize {
        self.0
    }

    /// Splits `range` into chunks, maps each chunk and folds the partial
    /// results with `reduce`.
    pub fn map_reduce<T, M, R>(&self, range: Range<u128>, map: M, identity: T, reduce: R) -> T
    where
        T: Send + Sync + Clone,
        M: Fn(Range<u128>) -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        let len = range.end.saturating_sub(range.start);
        if self.0 == 1 || len < 4096 {
            return reduce(identity, map(range));
        }
        let chunks = (self.0 * 8) as u128;
        let step = len.div_ceil(chunks);
        let parts: Vec<Range<u128>> = (0..chunks)
            .map(|i| {
                let s = range.start + i * step;
                s.min(range.end)..(s + step).min(range.end)
            })
            .filter(|r| !r.is_empty())
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.0)
            .build()
            .expect("thread pool");
        pool.install(|| {
            parts
                .into_par_iter()
                .map(map)
                .reduce(|| identity.clone(), reduce)
        })
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::single()
    }
}
