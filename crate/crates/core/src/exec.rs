//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in input order, so callers that reduce
//! (first witness, maximum residual, ...) get the same answer whichever
//! strategy runs. Without the `parallel` feature `Execution::Parallel`
//! silently runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Smallest `Some` produced by `f` over `0..n` under the key order.
    /// Deterministic: ties and scheduling never change the answer.
    pub fn min_by_key_range<T, K, F, G>(self, n: usize, f: F, key: G) -> Option<T>
    where
        T: Send,
        K: Ord,
        F: Fn(usize) -> Option<T> + Sync + Send,
        G: Fn(&T) -> K + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().filter_map(f).min_by(|a, b| key(a).cmp(&key(b))),
            _ => (0..n).filter_map(f).min_by(|a, b| key(a).cmp(&key(b))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let seq = Execution::Sequential.map_range(1000, |i| i * i);
        let par = Execution::Parallel.map_range(1000, |i| i * i);
        assert_eq!(seq, par);

        let pick = |mode: Execution| mode.min_by_key_range(500, |i| (i % 7 == 3).then_some(i), |&i| (i % 10, i));
        assert_eq!(pick(Execution::Sequential), pick(Execution::Parallel));
        assert_eq!(pick(Execution::Sequential), Some(10));
    }
}
