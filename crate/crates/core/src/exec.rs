//! Batch execution strategy: data-parallel via rayon or plain sequential.
//!
//! Every checker maps an independent job over many samples and then reduces
//! the collected results *sequentially and in index order*, so reports are
//! bit-identical across strategies and thread counts.

/// How to map a batch of independent jobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Use the rayon thread pool when the crate is built with the
    /// `parallel` feature; otherwise identical to `Sequential`.
    #[default]
    Parallel,
    /// Run jobs one after another on the calling thread.
    Sequential,
}

impl ExecMode {
    /// Parallel when compiled in, sequential otherwise.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Map `job` over `0..count` preserving index order in the output.
///
/// The closure must be deterministic in its index argument; under the
/// `parallel` feature the work is distributed over the rayon pool but the
/// returned vector is always ordered `job(0), job(1), ...`.
pub fn run_batch<T, F>(mode: ExecMode, count: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..count).map(job).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(job).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..count).map(job).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_results_are_in_index_order() {
        let seq = run_batch(ExecMode::Sequential, 100, |i| i * i);
        let par = run_batch(ExecMode::Parallel, 100, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn empty_batch_is_fine() {
        let out: Vec<u8> = run_batch(ExecMode::Parallel, 0, |_| 0u8);
        assert!(out.is_empty());
    }
}
