//! Optional data parallelism behind the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, on the rayon pool when `parallel` is set and the feature
/// is enabled. Output order always matches input order.
pub(crate) fn map_maybe_parallel<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
