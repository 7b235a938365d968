//! Thread-count-independent parallel map.
//!
//! Tasks are indexed; each worker takes a contiguous slice of indices and the
//! results are stitched back in index order, so the output is identical
//! whatever the worker count. `POSLINK_THREADS` caps the worker count.

/// Worker count: `POSLINK_THREADS` when set (minimum 1), else available
/// parallelism, else 1.
pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var("POSLINK_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Apply `f` to every index in 0..n using up to `workers` threads. The
/// result vector is ordered by index regardless of scheduling; `f` must be a
/// pure function of its index for outputs to be thread-count independent.
pub fn map_indexed<R, F>(n: usize, workers: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(workers);
    let mut out: Vec<Option<R>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut rest = out.as_mut_slice();
        let mut start = 0;
        let mut handles = Vec::new();
        while start < n {
            let len = chunk.min(n - start);
            let (head, tail) = rest.split_at_mut(len);
            rest = tail;
            let base = start;
            let f = &f;
            handles.push(scope.spawn(move || {
                for (offset, slot) in head.iter_mut().enumerate() {
                    *slot = Some(f(base + offset));
                }
            }));
            start += len;
        }
        for h in handles {
            h.join().expect("worker thread panicked");
        }
    });
    out.into_iter().map(|r| r.expect("slot filled")).collect()
}
