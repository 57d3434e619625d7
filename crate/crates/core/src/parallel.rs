//! Ordered fan-out over indices with a fixed worker count.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Runs index-parallel work on a private pool. Results always come back in
/// index order, so the output does not depend on the worker count.
pub struct Executor {
    pool: Option<ThreadPool>,
}

impl Executor {
    pub fn new(workers: usize) -> Self {
        let pool = if workers > 1 {
            ThreadPoolBuilder::new().num_threads(workers).build().ok()
        } else {
            None
        };
        Self { pool }
    }

    pub fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
            None => (0..len).map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = Executor::new(1).map(100, |i| i * i);
        let par = Executor::new(8).map(100, |i| i * i);
        assert_eq!(seq, par);
    }
}
