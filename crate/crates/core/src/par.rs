//! Data-parallel helpers.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run sequentially. [`set_sequential`] forces the sequential path at runtime,
//! which is what the benches use to compare both.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force (or release) the sequential code path for the whole process.
pub fn set_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::Relaxed);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Map `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Map `f` over `0..n`, preserving order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Run `f` on consecutive chunks of `items`.
pub fn for_each_chunk<T, F>(items: &[T], chunk: usize, f: F)
where
    T: Sync,
    F: Fn(&[T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        items.par_chunks(chunk).for_each(f);
        return;
    }
    items.chunks(chunk).for_each(f);
}

/// Fold chunks of `items` into partial results and combine them.
pub fn fold_chunks<T, A, F, G>(items: &[T], chunk: usize, init: A, f: F, combine: G) -> A
where
    T: Sync,
    A: Clone + Send + Sync,
    F: Fn(A, &[T]) -> A + Sync + Send,
    G: Fn(A, A) -> A + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return items
            .par_chunks(chunk)
            .map(|c| f(init.clone(), c))
            .reduce(|| init.clone(), &combine);
    }
    items
        .chunks(chunk)
        .fold(init.clone(), |acc, c| combine(acc, f(init.clone(), c)))
}
