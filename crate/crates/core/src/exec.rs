//! Execution strategy for the data-parallel sweeps.
//!
//! Every sweep in this crate (value-iteration passes, Monte Carlo batches,
//! verification point sets) is written as an indexed map whose output is
//! collected in index order. The parallel and sequential paths therefore
//! produce bit-identical results; [`Exec`] only chooses how the work is
//! scheduled. Without the `parallel` feature, [`Exec::Parallel`] falls back
//! to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `Parallel` when `threads != 1` and the feature is compiled in.
    pub fn from_threads(threads: usize) -> Self {
        if threads == 1 {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Overwrites `out[i]` with `f(i)`.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, slot)| *slot = f(i)),
            _ => out
                .iter_mut()
                .enumerate()
                .for_each(|(i, slot)| *slot = f(i)),
        }
    }
}
