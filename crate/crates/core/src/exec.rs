//! Execution strategy for the data-parallel loops (boundary nodes in the
//! forward model, grid points in the imaging map).
//!
//! Every loop body writes one independent output slot, so results do not
//! depend on the strategy or the number of worker threads.

/// How an embarrassingly parallel loop is run.
///
/// Without the `parallel` feature, `Parallel` runs sequentially.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub(crate) fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Calls `f(chunk_index, chunk)` for consecutive chunks of `buf`.
    pub(crate) fn for_each_chunk<T, F>(self, buf: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                buf.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            }
            _ => buf.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
        }
    }
}
