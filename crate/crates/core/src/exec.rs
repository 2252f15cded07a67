//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature (default) work runs on the rayon global pool;
//! without it everything runs on the calling thread. Results are collected in
//! index order either way, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Rayon,
}


impl Parallelism {
    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Parallelism::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Parallelism::Rayon => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Like [`Parallelism::map`] but stops at the first error (by index order).
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_default_agree() {
        let f = |i: usize| (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        assert_eq!(
            Parallelism::Sequential.map(1000, f),
            Parallelism::default().map(1000, f)
        );
    }
}
