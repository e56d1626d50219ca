//! Execution policy for sampling loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] maps over
//! the rayon thread pool. Without it every policy runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this policy actually uses threads in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..len).map(f)`, collected in index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt();
        assert_eq!(Exec::Sequential.map(1000, f), Exec::Parallel.map(1000, f));
        let v: Vec<u32> = (0..100).collect();
        assert_eq!(Exec::Sequential.map_slice(&v, |x| x * 2), Exec::Parallel.map_slice(&v, |x| x * 2));
    }
}
