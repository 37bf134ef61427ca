//! Fixed-size worker pool over an index-ordered queue with a single in-order
//! collector.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

/// Runs `work` on every item with `workers` threads and hands results to
/// `sink` in index order, independent of completion order. Stops at the first
/// sink error.
pub fn run_ordered<T, R, E, F, S>(items: &[T], workers: usize, work: F, mut sink: S) -> Result<(), E>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
    S: FnMut(usize, R) -> Result<(), E>,
{
    let workers = workers.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, work) = (&next, &work);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() || tx.send((i, work(i, &items[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut expected = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&expected) {
                if let Err(e) = sink(expected, r) {
                    // Unblock workers so the scope can join.
                    next.store(items.len(), Ordering::Relaxed);
                    return Err(e);
                }
                expected += 1;
            }
        }
        Ok(())
    })
}

/// Collects [`run_ordered`] results into a vector.
pub fn map_ordered<T, R, F>(items: &[T], workers: usize, work: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let mut out = Vec::with_capacity(items.len());
    run_ordered::<_, _, (), _, _>(items, workers, work, |_, r| {
        out.push(r);
        Ok(())
    })
    .expect("infallible sink");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_by_index() {
        let items: Vec<u64> = (0..50).collect();
        for workers in [1, 3, 8] {
            let out = map_ordered(&items, workers, |i, &x| {
                // Later items finish first.
                std::thread::sleep(std::time::Duration::from_micros(50 * (50 - x)));
                (i, x * x)
            });
            assert_eq!(out, items.iter().map(|&x| (x as usize, x * x)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sink_error_stops() {
        let items: Vec<u32> = (0..100).collect();
        let mut seen = 0;
        let r = run_ordered(&items, 4, |_, &x| x, |i, _| {
            seen += 1;
            if i == 10 {
                Err("stop")
            } else {
                Ok(())
            }
        });
        assert_eq!(r, Err("stop"));
        assert_eq!(seen, 11);
    }
}
