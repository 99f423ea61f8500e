//! Sequential / data-parallel execution switch.
//!
//! `Execution::Parallel` uses rayon when the `parallel` feature is enabled and
//! silently degrades to the sequential path otherwise. Both paths return results
//! in input order, so callers observe identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build actually runs `Parallel` on a thread pool.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// First (by input order) item for which `f` returns `Some`.
    pub fn find_map_first<T, R, F>(self, items: &[T], f: F) -> Option<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Option<R> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().find_map_first(f),
            _ => items.iter().find_map(f),
        }
    }

    pub fn flat_map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Vec<R> + Sync + Send,
    {
        self.map(items, f).into_iter().flatten().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let xs: Vec<u32> = (0..1000).collect();
        let a = Execution::Sequential.map(&xs, |x| x * 3);
        let b = Execution::Parallel.map(&xs, |x| x * 3);
        assert_eq!(a, b);
        let f = |x: &u32| (x % 97 == 13 && *x > 100).then_some(*x);
        assert_eq!(
            Execution::Sequential.find_map_first(&xs, f),
            Execution::Parallel.find_map_first(&xs, f)
        );
        assert_eq!(Execution::Parallel.find_map_first(&xs, f), Some(110));
    }
}
