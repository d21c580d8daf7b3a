//! Blocking: partition mentions by type and stream candidate pairs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extract::{EntityType, MajorType, Mention, MentionId};

/// Blocking key. `subtype` is `None` when subtypes are merged away.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartitionKey {
    pub major: MajorType,
    pub subtype: Option<String>,
}

impl PartitionKey {
    pub fn of(entity_type: &EntityType, config: &BlockConfig) -> Self {
        let subtype = (!config.merge_empty_subtype).then(|| entity_type.subtype.clone());
        Self { major: entity_type.major, subtype }
    }
}

impl fmt::Display for PartitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subtype {
            Some(s) => write!(f, "{}/{}", self.major, s),
            None => write!(f, "{}/*", self.major),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct BlockConfig {
    /// Block on major type only, ignoring subtypes.
    pub merge_empty_subtype: bool,
    /// Pair one representative per distinct surface in each partition.
    pub dedupe_surfaces: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub key: PartitionKey,
    /// Sorted ascending, no duplicates.
    pub members: Vec<MentionId>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn pair_count(&self) -> u64 {
        pair_count(self.members.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidatePair {
    pub a: MentionId,
    pub b: MentionId,
}

impl CandidatePair {
    /// Orders the two ids; `None` if they are equal.
    pub fn new(x: MentionId, y: MentionId) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Self { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Self { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

impl fmt::Display for CandidatePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.a, self.b)
    }
}

/// Group by key; partitions come back sorted by key.
pub fn partition_by_key<'a, I>(items: I, config: &BlockConfig) -> Vec<Partition>
where
    I: IntoIterator<Item = (&'a MentionId, &'a EntityType)>,
{
    let mut groups: BTreeMap<PartitionKey, Vec<MentionId>> = BTreeMap::new();
    for (id, ty) in items {
        groups.entry(PartitionKey::of(ty, config)).or_default().push(id.clone());
    }
    groups
        .into_iter()
        .map(|(key, mut members)| {
            members.sort();
            members.dedup();
            Partition { key, members }
        })
        .collect()
}

pub fn partition_mentions(mentions: &[Mention], config: &BlockConfig) -> Vec<Partition> {
    partition_by_key(mentions.iter().map(|m| (&m.id, &m.entity_type)), config)
}

/// Keep the first member (in id order) of each distinct surface.
///
/// Returns the reduced partition and `(duplicate, representative)` links.
pub fn dedupe_surfaces<'s>(
    partition: &Partition,
    surface_of: impl Fn(&MentionId) -> &'s str,
) -> (Partition, Vec<(MentionId, MentionId)>) {
    let mut seen: HashMap<&str, &MentionId> = HashMap::new();
    let mut kept = Vec::new();
    let mut links = Vec::new();
    for id in &partition.members {
        match seen.get(surface_of(id)) {
            Some(rep) => links.push((id.clone(), (*rep).clone())),
            None => {
                seen.insert(surface_of(id), id);
                kept.push(id.clone());
            }
        }
    }
    (Partition { key: partition.key.clone(), members: kept }, links)
}

/// `C(n, 2)`.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Index pairs `(i, j)` with `i < j < n` in lexicographic order, streamed.
///
/// The k-th pair can be reached directly, so the sequence splits into
/// contiguous chunks for parallel scoring.
#[derive(Debug, Clone)]
pub struct IndexPairs {
    n: usize,
    i: usize,
    j: usize,
    remaining: u64,
}

impl IndexPairs {
    pub fn new(n: usize) -> Self {
        Self::range(n, 0, pair_count(n))
    }

    /// Pairs with linear index in `[from, to)`.
    pub fn range(n: usize, from: u64, to: u64) -> Self {
        let total = pair_count(n);
        let to = to.min(total);
        let from = from.min(to);
        let (i, j) = if from < total { pair_at(n, from) } else { (n, n) };
        Self { n, i, j, remaining: to - from }
    }
}

/// Linear index of the first pair in row `i`.
fn row_start(n: u64, i: u64) -> u64 {
    i * (2 * n - i - 1) / 2
}

/// The `k`-th pair of `IndexPairs::new(n)`.
pub fn pair_at(n: usize, k: u64) -> (usize, usize) {
    assert!(k < pair_count(n), "pair index {k} out of range for n = {n}");
    let n64 = n as u64;
    let (mut lo, mut hi) = (0u64, n64 - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if row_start(n64, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = lo;
    let j = i + 1 + (k - row_start(n64, i));
    (i as usize, j as usize)
}

impl Iterator for IndexPairs {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = (self.i, self.j);
        self.j += 1;
        if self.j == self.n {
            self.i += 1;
            self.j = self.i + 1;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, usize::try_from(self.remaining).ok())
    }
}

impl ExactSizeIterator for IndexPairs {}

/// All pairs of one partition in canonical order.
pub fn generate_pairs(partition: &Partition) -> impl Iterator<Item = CandidatePair> + '_ {
    let m = &partition.members;
    IndexPairs::new(m.len()).map(move |(i, j)| CandidatePair { a: m[i].clone(), b: m[j].clone() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub key: PartitionKey,
    pub mentions: usize,
    pub pairs: u64,
}

pub fn partition_stats(partitions: &[Partition]) -> Vec<PartitionStats> {
    partitions
        .iter()
        .map(|p| PartitionStats { key: p.key.clone(), mentions: p.len(), pairs: p.pair_count() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn id(doc: &str, k: usize) -> MentionId {
        MentionId::new(doc, Span::new(k, k + 1))
    }

    fn typed(major: MajorType, sub: &str) -> EntityType {
        EntityType::new(major, sub)
    }

    #[test]
    fn grouping_examples() {
        let ids: Vec<_> = (0..5).map(|k| id("d", k)).collect();
        let types = [
            typed(MajorType::Person, "politician"),
            typed(MajorType::Location, ""),
            typed(MajorType::Person, "politician"),
            typed(MajorType::Location, ""),
            typed(MajorType::Person, "politician"),
        ];
        let parts = partition_by_key(ids.iter().zip(&types), &BlockConfig::default());
        let sizes: Vec<_> = parts.iter().map(|p| (p.key.to_string(), p.len())).collect();
        assert_eq!(sizes, vec![("person/politician".to_string(), 3), ("location/".to_string(), 2)]);

        let same = partition_by_key(ids.iter().zip(std::iter::repeat(&types[0])), &BlockConfig::default());
        assert_eq!(same.len(), 1);
        assert!(partition_by_key(std::iter::empty(), &BlockConfig::default()).is_empty());
    }

    #[test]
    fn merge_empty_subtype() {
        let ids: Vec<_> = (0..3).map(|k| id("d", k)).collect();
        let types = [
            typed(MajorType::Person, "politician"),
            typed(MajorType::Person, ""),
            typed(MajorType::Location, ""),
        ];
        let cfg = BlockConfig { merge_empty_subtype: true, ..BlockConfig::default() };
        let parts = partition_by_key(ids.iter().zip(&types), &cfg);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].key.to_string(), "person/*");
        assert_eq!(parts[0].len(), 2);
        assert_eq!(partition_by_key(ids.iter().zip(&types), &BlockConfig::default()).len(), 3);
    }

    #[test]
    fn enumeration() {
        let p = Partition {
            key: PartitionKey { major: MajorType::Person, subtype: Some(String::new()) },
            members: vec![id("d", 1), id("d", 2), id("d", 3)],
        };
        let pairs: Vec<_> = generate_pairs(&p).map(|c| (c.a.start, c.b.start)).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (2, 3)]);
        let single = Partition { members: vec![id("d", 1)], ..p };
        assert_eq!(generate_pairs(&single).count(), 0);
        assert_eq!(IndexPairs::new(0).count(), 0);
    }

    #[test]
    fn large_partition_count() {
        assert_eq!(pair_count(30_000), 449_985_000);
        assert_eq!(IndexPairs::new(30_000).len(), 449_985_000);
    }

    #[test]
    fn random_access_matches_stream() {
        for n in 0..25 {
            let all: Vec<_> = IndexPairs::new(n).collect();
            assert_eq!(all.len() as u64, pair_count(n));
            for (k, &p) in all.iter().enumerate() {
                assert_eq!(pair_at(n, k as u64), p);
            }
            let total = pair_count(n);
            for cut in 0..=total {
                let joined: Vec<_> = IndexPairs::range(n, 0, cut).chain(IndexPairs::range(n, cut, total)).collect();
                assert_eq!(joined, all);
            }
        }
    }

    #[test]
    fn candidate_pair_order() {
        let p = CandidatePair::new(id("b", 0), id("a", 5)).unwrap();
        assert_eq!((p.a.doc_id.as_str(), p.b.doc_id.as_str()), ("a", "b"));
        assert!(CandidatePair::new(id("a", 0), id("a", 0)).is_none());
    }

    #[test]
    fn surface_dedupe() {
        let p = Partition {
            key: PartitionKey { major: MajorType::Person, subtype: Some(String::new()) },
            members: vec![id("d", 0), id("d", 1), id("d", 2), id("d", 3)],
        };
        let surfaces = ["Obama", "Clinton", "Obama", "Obama"];
        let (reduced, links) = dedupe_surfaces(&p, |m| surfaces[m.start]);
        assert_eq!(reduced.members, vec![id("d", 0), id("d", 1)]);
        assert_eq!(links, vec![(id("d", 2), id("d", 0)), (id("d", 3), id("d", 0))]);
    }

    proptest! {
        #[test]
        fn pairs_equal_filtered_cartesian(
            keys in proptest::collection::vec((0usize..3, 0usize..3), 0..200),
            merge in any::<bool>(),
        ) {
            let majors = [MajorType::Person, MajorType::Location, MajorType::Organization];
            let subs = ["", "a", "b"];
            let ids: Vec<_> = (0..keys.len()).map(|k| id("d", k)).collect();
            let types: Vec<_> = keys.iter().map(|&(m, s)| typed(majors[m], subs[s])).collect();
            let cfg = BlockConfig { merge_empty_subtype: merge, ..BlockConfig::default() };
            let parts = partition_by_key(ids.iter().zip(&types), &cfg);

            let emitted: Vec<_> = parts.iter().flat_map(generate_pairs).collect();
            let unique: BTreeSet<_> = emitted.iter().cloned().collect();
            prop_assert_eq!(unique.len(), emitted.len());
            let expected_count: u64 = parts.iter().map(|p| pair_count(p.len())).sum();
            prop_assert_eq!(emitted.len() as u64, expected_count);

            let same = |x: usize, y: usize| {
                types[x].major == types[y].major && (merge || types[x].subtype == types[y].subtype)
            };
            let mut oracle = BTreeSet::new();
            for x in 0..ids.len() {
                for y in 0..ids.len() {
                    if x != y && same(x, y) {
                        oracle.insert(CandidatePair::new(ids[x].clone(), ids[y].clone()).unwrap());
                    }
                }
            }
            prop_assert_eq!(unique, oracle);
        }
    }
}
