//! Execution strategy for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Exec::map`], which keeps
//! output order equal to input order. Results therefore never depend on the
//! number of worker threads. Without the `parallel` feature both variants run
//! on the calling thread.

/// How to run an embarrassingly parallel loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work stealing on the current pool (sequential when the
    /// `parallel` feature is disabled).
    #[default]
    Parallel,
}

impl Exec {
    /// True when this strategy actually fans out to rayon in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..len`, returning results in index order.
    pub fn map<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Like [`Exec::map`], but hands each worker a scratch value built by
    /// `init`, reused across the indices that worker processes.
    pub fn map_init<S, R, I, F>(self, len: usize, init: I, f: F) -> Vec<R>
    where
        R: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map_init(&init, &f).collect();
        }
        let mut scratch = init();
        (0..len).map(|i| f(&mut scratch, i)).collect()
    }
}

/// Runs `op` on a dedicated pool with `threads` workers, or directly when the
/// `parallel` feature is off.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op()
    }
}

/// Neumaier-compensated sum; used wherever many floating values are
/// aggregated so that totals are stable across runs.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
