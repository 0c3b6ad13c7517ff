//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`map_range`], which keeps
//! output order fixed, and every floating-point reduction goes through the
//! pairwise helpers here. Results are therefore bit-identical between
//! [`Exec::Sequential`] and [`Exec::Parallel`] and independent of the thread
//! count. Without the `parallel` feature both modes run sequentially.

use serde::{Deserialize, Serialize};
use std::ops::Add;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this mode actually dispatches to the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps over a slice in order.
pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation of a slice.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise reduction of owned items with an arbitrary combiner.
///
/// Returns `None` for an empty input.
pub fn pairwise_reduce<T, F>(mut items: Vec<T>, combine: F) -> Option<T>
where
    F: Fn(T, T) -> T,
{
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_keeps_order() {
        let seq = map_range(Exec::Sequential, 1000, |i| i * i);
        let par = map_range(Exec::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn pairwise_sum_matches_exact_small_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn pairwise_reduce_combines_everything_once() {
        let v: Vec<u64> = (0..37).collect();
        assert_eq!(pairwise_reduce(v, |a, b| a + b), Some(666));
        assert_eq!(pairwise_reduce(Vec::<u64>::new(), |a, b| a + b), None);
    }
}
