//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`ExecMode::Auto`] dispatches to
//! rayon; without it every mode runs on the calling thread. Results are
//! always collected in input order, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Auto,
    Sequential,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Auto
    }
}

/// `(0..len).map(f).collect()`, in parallel when enabled.
pub fn map_indexed<T, F>(len: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..len).map(f).collect()
}

/// `items.iter().map(f).collect()`, in parallel when enabled.
pub fn map_slice<I, T, F>(items: &[I], mode: ExecMode, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Pairwise (cascade) summation; order is fixed by the slice, not by threads.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = map_indexed(1000, ExecMode::Auto, |i| (i as f64).sqrt());
        let b = map_indexed(1000, ExecMode::Sequential, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }

    #[test]
    fn pairwise_matches_exact_integers() {
        let v: Vec<f64> = (1..=10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 50_005_000.0);
    }
}
