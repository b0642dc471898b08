//! Trial execution: a rayon pool when the `parallel` feature is on, a plain
//! loop otherwise. Results always come back in index order, so parallel and
//! sequential runs are interchangeable.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "METRIC_FRAG_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..count).map(f)`, possibly spread over the worker pool.
pub fn map_indexed<T, F>(count: usize, mode: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            pool::install(|| (0..count).into_par_iter().map(f).collect())
        }
        _ => (0..count).map(f).collect(),
    }
}

#[cfg(feature = "parallel")]
mod pool {
    use std::sync::OnceLock;

    use rayon::{ThreadPool, ThreadPoolBuilder};

    static CAPPED: OnceLock<Option<ThreadPool>> = OnceLock::new();

    fn capped() -> Option<&'static ThreadPool> {
        CAPPED
            .get_or_init(|| {
                let threads = std::env::var(super::THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
                ThreadPoolBuilder::new().num_threads(threads.max(1)).build().ok()
            })
            .as_ref()
    }

    pub fn install<R: Send>(op: impl FnOnce() -> R + Send) -> R {
        match capped() {
            Some(pool) => pool.install(op),
            None => op(),
        }
    }
}

/// Seed of trial `index`: the `index`-th output of a SplitMix64 stream
/// started at `master`. Trials never share or reuse generator state.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| trial_seed(42, i as u64);
        assert_eq!(map_indexed(500, Execution::Sequential, f), map_indexed(500, Execution::Parallel, f));
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..10_000).map(|i| trial_seed(1, i)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn mean_se() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_se(&[7.0]), (7.0, 0.0));
    }
}
