//! Trial-level and row-level parallelism.
//!
//! With the `parallel` feature (on by default) work is spread over rayon's
//! pool. Without it, or with [`Execution::Sequential`], everything runs on the
//! calling thread. Results are always collected in index order, so both paths
//! produce identical values.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::rng::SeedTree;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Runs `f(i, seeds.child(i))` for `i in 0..trials`, returning results in order.
pub fn map_trials<T, F>(trials: u64, seeds: SeedTree, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, SeedTree) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..trials).into_par_iter().map(|i| f(i, seeds.child(i))).collect();
    }
    let _ = exec;
    (0..trials).map(|i| f(i, seeds.child(i))).collect()
}

/// Maps over a slice, preserving order.
pub fn map_items<S, T, F>(items: &[S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(usize, &S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().enumerate().map(|(i, s)| f(i, s)).collect();
    }
    let _ = exec;
    items.iter().enumerate().map(|(i, s)| f(i, s)).collect()
}

pub(crate) fn for_each_row<T, F>(out: &mut [T], row_len: usize, split: bool, kernel: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if split {
        out.par_chunks_mut(row_len).enumerate().for_each(|(i, row)| kernel(i, row));
        return;
    }
    let _ = split;
    out.chunks_mut(row_len).enumerate().for_each(|(i, row)| kernel(i, row));
}
