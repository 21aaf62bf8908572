use std::ops::Range;

/// Splits `0..len` into at most `workers` contiguous, near-equal ranges.
/// The split depends only on `len` and `workers`.
pub fn partition(len: usize, workers: usize) -> Vec<Range<usize>> {
    let workers = workers.clamp(1, len.max(1));
    let base = len / workers;
    let extra = len % workers;
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let size = base + usize::from(w < extra);
            let range = start..start + size;
            start += size;
            range
        })
        .collect()
}

/// Runs `job` on each range of `partition(len, workers)` and returns the
/// results in range order. A single range runs on the calling thread.
pub fn map_ranges<T, F>(len: usize, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let ranges = partition(len, workers);
    if ranges.len() == 1 {
        return ranges.into_iter().map(&job).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| {
                let job = &job;
                scope.spawn(move || job(r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Pairwise reduction in a fixed shape: `((p0 + p1) + (p2 + p3)) + ...`.
/// Deterministic for a given number of parts.
pub fn tree_reduce<T>(mut parts: Vec<T>, combine: impl Fn(T, T) -> T) -> Option<T> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut iter = parts.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}
