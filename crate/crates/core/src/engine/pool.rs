use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};

/// Outputs of a sharded map, in shard order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardRun<O> {
    pub outputs: Vec<O>,
    /// Items handled by each worker.
    pub per_worker: Vec<u64>,
}

/// Apply `f` to every shard on `workers` threads.
///
/// Workers pull shards from a shared counter, so the split between workers
/// varies from run to run; the outputs do not. `size` gives the item count
/// of a shard for the per-worker tallies.
pub fn map_shards<I, O, F, S>(shards: &[I], workers: usize, f: F, size: S) -> ShardRun<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
    S: Fn(&I) -> usize + Sync,
{
    let workers = workers.max(1);
    let next = AtomicUsize::new(0);
    let run = |_: usize| {
        let mut done = Vec::new();
        let mut items = 0u64;
        loop {
            let k = next.fetch_add(1, Ordering::Relaxed);
            let Some(shard) = shards.get(k) else { break };
            items += size(shard) as u64;
            done.push((k, f(shard)));
        }
        (done, items)
    };
    let per_thread: Vec<(Vec<(usize, O)>, u64)> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || run(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    let per_worker = per_thread.iter().map(|(_, n)| *n).collect();
    let mut indexed: Vec<(usize, O)> = per_thread.into_iter().flat_map(|(d, _)| d).collect();
    indexed.sort_unstable_by_key(|(k, _)| *k);
    ShardRun { outputs: indexed.into_iter().map(|(_, o)| o).collect(), per_worker }
}

/// Split `items` into consecutive shards of at most `size` elements.
pub fn shards<T>(items: &[T], size: usize) -> Vec<&[T]> {
    items.chunks(size.max(1)).collect()
}

/// Worker that reduces the group for `key`.
pub fn worker_for<K: Hash>(key: &K, workers: usize) -> usize {
    let mut h = DefaultHasher::new();
    key.hash(&mut h);
    (h.finish() % workers.max(1) as u64) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group<K, R> {
    pub key: K,
    /// Reducer the group was assigned to.
    pub worker: usize,
    /// Sorted ascending.
    pub records: Vec<R>,
}

/// Group records by key across `workers` mappers and reducers.
///
/// Mappers key consecutive slices of the input and route each record to the
/// reducer chosen by [`worker_for`]; reducers collect and sort their groups.
/// Groups come back sorted by key, so the result does not depend on the
/// worker count.
pub fn shuffle_by_key<R, K, F>(records: Vec<R>, key_fn: F, workers: usize) -> Vec<Group<K, R>>
where
    R: Ord + Send + Sync + Clone,
    K: Ord + Hash + Send,
    F: Fn(&R) -> K + Sync,
{
    let workers = workers.max(1);
    let chunk = records.len().div_ceil(workers).max(1);
    let inputs = shards(&records, chunk);
    let mapped = map_shards(
        &inputs,
        workers,
        |slice| {
            let mut buckets: Vec<Vec<(K, R)>> = (0..workers).map(|_| Vec::new()).collect();
            for r in slice.iter() {
                let k = key_fn(r);
                buckets[worker_for(&k, workers)].push((k, r.clone()));
            }
            buckets
        },
        |slice| slice.len(),
    );
    let mut inbox: Vec<Vec<(K, R)>> = (0..workers).map(|_| Vec::new()).collect();
    for buckets in mapped.outputs {
        for (w, b) in buckets.into_iter().enumerate() {
            inbox[w].extend(b);
        }
    }
    let inbox: Vec<std::sync::Mutex<Vec<(K, R)>>> = inbox.into_iter().map(std::sync::Mutex::new).collect();
    let worker_ids: Vec<usize> = (0..workers).collect();
    let reduced = map_shards(
        &worker_ids,
        workers,
        |&w| {
            let mut groups: BTreeMap<K, Vec<R>> = BTreeMap::new();
            for (k, r) in std::mem::take(&mut *inbox[w].lock().expect("inbox lock")) {
                groups.entry(k).or_default().push(r);
            }
            groups
                .into_iter()
                .map(|(key, mut records)| {
                    records.sort();
                    Group { key, worker: w, records }
                })
                .collect::<Vec<_>>()
        },
        |_| 1,
    );
    let mut groups: Vec<Group<K, R>> = reduced.outputs.into_iter().flatten().collect();
    groups.sort_by(|a, b| a.key.cmp(&b.key));
    groups
}
