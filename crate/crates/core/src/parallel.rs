//! Data-parallel helpers. With the `parallel` feature off every path runs sequentially.

/// Execution strategy chosen at run time; `Parallel` degrades to sequential without the feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Map over `0..n` preserving order.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Map over a slice preserving order.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maximum of `f` over `0..n` by key; ties keep the lowest index so results are
/// identical under both strategies.
pub fn max_over<K, W, F>(exec: Exec, n: usize, f: F) -> Option<(K, W)>
where
    K: Ord + Send,
    W: Send,
    F: Fn(usize) -> Option<(K, W)> + Sync + Send,
{
    let pick = |a: Option<(usize, K, W)>, b: Option<(usize, K, W)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                Some(b)
            } else {
                Some(a)
            }
        }
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n)
            .into_par_iter()
            .map(|i| f(i).map(|(k, w)| (i, k, w)))
            .reduce(|| None, pick)
            .map(|(_, k, w)| (k, w));
    }
    let _ = exec;
    (0..n).map(|i| f(i).map(|(k, w)| (i, k, w))).fold(None, pick).map(|(_, k, w)| (k, w))
}
