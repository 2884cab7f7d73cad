//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool
//! that is current for the caller. Without it, or inside [`sequential`], the
//! same closures run on the calling thread. Results always come back in input
//! order, so reductions performed on them are independent of the thread count.

#[cfg(feature = "parallel")]
use std::cell::Cell;

#[cfg(feature = "parallel")]
thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `body` with every helper in this module forced onto the calling thread.
pub fn sequential<R>(body: impl FnOnce() -> R) -> R {
    #[cfg(feature = "parallel")]
    {
        let previous = FORCE_SEQUENTIAL.with(|f| f.replace(true));
        let out = body();
        FORCE_SEQUENTIAL.with(|f| f.set(previous));
        out
    }
    #[cfg(not(feature = "parallel"))]
    {
        body()
    }
}

pub fn is_parallel() -> bool {
    #[cfg(feature = "parallel")]
    {
        !FORCE_SEQUENTIAL.with(|f| f.get())
    }
    #[cfg(not(feature = "parallel"))]
    {
        false
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Splits `items` into fixed-size batches (independent of the thread count)
/// and maps each batch, preserving order.
pub fn map_batches<T, R, F>(items: &[T], batch: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    let chunks: Vec<&[T]> = items.chunks(batch.max(1)).collect();
    map_ordered(&chunks, |c| f(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let items: Vec<u64> = (0..1000).collect();
        let par = map_ordered(&items, |x| x * x);
        let seq = sequential(|| map_ordered(&items, |x| x * x));
        assert_eq!(par, seq);
        assert_eq!(par[999], 999 * 999);
    }

    #[test]
    fn batches_cover_input() {
        let items: Vec<u32> = (0..103).collect();
        let sums = map_batches(&items, 10, |c| c.iter().sum::<u32>());
        assert_eq!(sums.len(), 11);
        assert_eq!(sums.iter().sum::<u32>(), items.iter().sum::<u32>());
    }
}
