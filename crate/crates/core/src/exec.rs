//! Execution strategy for embarrassingly parallel loops: batch solving,
//! benchmarks and oracle enumeration. Without the `parallel` feature both
//! variants run on the calling thread.

/// Results always come back in input order, whichever variant runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, len: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Smallest index in `0..len` satisfying `pred`.
    pub fn find_first<F>(self, len: u64, pred: F) -> Option<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().find_first(|&k| pred(k))
            }
            _ => (0..len).find(|&k| pred(k)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_variants_agree() {
        let items: Vec<u64> = (0..1000).collect();
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert_eq!(exec.map(&items, |x| x * x)[999], 998001);
            assert_eq!(exec.map_range(10, |k| k + 1), (1..=10).collect::<Vec<_>>());
            assert_eq!(exec.find_first(1000, |k| k % 7 == 6 && k > 100), Some(104));
            assert_eq!(exec.find_first(10, |_| false), None);
        }
    }
}
