//! Indexed parallel map over independent work items.
//!
//! Results land in per-index slots and the reduction is a sequential walk in
//! index order, so output bits do not depend on the worker count. `--jobs 1`
//! (the default) runs strictly sequentially.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::Result;

static JOBS: AtomicUsize = AtomicUsize::new(1);

pub fn set_jobs(n: usize) {
    JOBS.store(n.max(1), Ordering::SeqCst);
}

pub fn jobs() -> usize {
    JOBS.load(Ordering::SeqCst)
}

pub fn map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    let workers = jobs().min(items.len()).max(1);
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<Result<U>>> = (0..items.len()).map(|_| None).collect();
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (item_chunk, slot_chunk) in items.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (item, slot) in item_chunk.iter().zip(slot_chunk.iter_mut()) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled every slot")).collect()
}
