//! Grouping coreferent mentions into entity clusters.

mod streaming;
mod unionfind;

pub use streaming::{streaming_cluster, StreamCluster, StreamingState};
pub use unionfind::UnionFind;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{PairDecision, PairScore, Verdict};
use crate::extract::{Mention, MentionId};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("clustering configuration: {0}")]
    Config(String),
    #[error("unknown mention `{0}`")]
    UnknownMention(String),
    #[error("cluster file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCluster {
    #[serde(rename = "clusterId")]
    pub id: String,
    #[serde(rename = "canonicalLabel")]
    pub canonical_label: String,
    /// Sorted ascending.
    pub members: Vec<MentionId>,
}

/// Mentions addressed by dense index, sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionTable {
    ids: Vec<MentionId>,
    surfaces: Vec<String>,
}

impl MentionTable {
    pub fn new(mut entries: Vec<(MentionId, String)>) -> Self {
        entries.sort();
        entries.dedup_by(|a, b| a.0 == b.0);
        let (ids, surfaces) = entries.into_iter().unzip();
        Self { ids, surfaces }
    }

    pub fn from_mentions<'a>(mentions: impl IntoIterator<Item = &'a Mention>) -> Self {
        Self::new(mentions.into_iter().map(|m| (m.id.clone(), m.surface.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[MentionId] {
        &self.ids
    }

    pub fn surface(&self, idx: usize) -> &str {
        &self.surfaces[idx]
    }

    pub fn index_of(&self, id: &MentionId) -> Result<usize, ClusterError> {
        self.ids.binary_search(id).map_err(|_| ClusterError::UnknownMention(id.to_string()))
    }

    /// Turn index groups into labelled clusters, ids assigned in order of
    /// smallest member.
    pub fn clusters(&self, mut groups: Vec<Vec<usize>>) -> Vec<EntityCluster> {
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_unstable_by_key(|g| g[0]);
        groups
            .into_iter()
            .enumerate()
            .map(|(k, g)| EntityCluster {
                id: format!("c{k:06}"),
                canonical_label: canonical_label(g.iter().map(|&i| self.surface(i))).to_string(),
                members: g.iter().map(|&i| self.ids[i].clone()).collect(),
            })
            .collect()
    }
}

/// Longest surface in characters; ties go to the lexicographically least.
pub fn canonical_label<'a>(surfaces: impl IntoIterator<Item = &'a str>) -> &'a str {
    surfaces
        .into_iter()
        .min_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)))
        .unwrap_or("")
}

/// Components of the graph whose edges are the coreferent decisions.
/// Mentions without edges become singletons.
pub fn connected_components<T: Scalar>(
    decisions: &[PairDecision<T>],
    table: &MentionTable,
) -> Result<Vec<EntityCluster>, ClusterError> {
    let mut uf = UnionFind::new(table.len());
    for d in decisions.iter().filter(|d| d.verdict == Verdict::Coreferent) {
        uf.union(table.index_of(&d.pair.a)?, table.index_of(&d.pair.b)?);
    }
    Ok(table.clusters(uf.groups()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Merge<T> {
    pub a: MentionId,
    pub b: MentionId,
    pub score: T,
}

/// Greedy single-link agglomeration.
///
/// Clusters joined by the highest-scoring pair merge first; ties follow the
/// canonical pair order. Stops once the best remaining link scores below
/// `stop`. Returns the clusters and the merges in the order they happened.
pub fn agglomerative_single_link<T: Scalar>(
    scores: &[PairScore<T>],
    table: &MentionTable,
    stop: T,
) -> Result<(Vec<EntityCluster>, Vec<Merge<T>>), ClusterError> {
    let mut edges: Vec<(usize, usize, &PairScore<T>)> = Vec::with_capacity(scores.len());
    for s in scores {
        edges.push((table.index_of(&s.pair.a)?, table.index_of(&s.pair.b)?, s));
    }
    edges.sort_by(|x, y| {
        y.2.combined
            .partial_cmp(&x.2.combined)
            .unwrap_or_else(|| x.2.combined.is_nan().cmp(&y.2.combined.is_nan()))
            .then_with(|| x.2.pair.cmp(&y.2.pair))
    });
    let mut uf = UnionFind::new(table.len());
    let mut merges = Vec::new();
    for (a, b, s) in edges {
        if !(s.combined >= stop) {
            break;
        }
        if uf.union(a, b) {
            merges.push(Merge { a: s.pair.a.clone(), b: s.pair.b.clone(), score: s.combined });
        }
    }
    Ok((table.clusters(uf.groups()), merges))
}

/// Streaming clustering over mentions in table order.
pub fn streaming_clusters<F: Fn(usize, usize) -> f64>(
    table: &MentionTable,
    sim: F,
    max_clusters: usize,
    radius_limit: f64,
) -> Result<Vec<EntityCluster>, ClusterError> {
    let groups = streaming_cluster(table.len(), sim, max_clusters, radius_limit)?;
    Ok(table.clusters(groups.into_iter().map(|c| c.members).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMode {
    #[default]
    Components,
    Agglomerative,
    Streaming,
}

impl std::str::FromStr for ClusterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "components" => Ok(Self::Components),
            "agglomerative" => Ok(Self::Agglomerative),
            "streaming" => Ok(Self::Streaming),
            _ => Err(format!("unknown cluster mode `{s}`")),
        }
    }
}

pub fn write_clusters_jsonl<W: Write>(mut w: W, clusters: &[EntityCluster]) -> std::io::Result<()> {
    for c in clusters {
        serde_json::to_writer(&mut w, c)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_clusters_jsonl<R: BufRead>(r: R) -> Result<Vec<EntityCluster>, ClusterError> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c: EntityCluster =
            serde_json::from_str(&line).map_err(|e| ClusterError::Parse { line: n + 1, message: e.to_string() })?;
        out.push(c);
    }
    Ok(out)
}

/// Order clusters as written: by id.
pub fn sort_clusters(clusters: &mut [EntityCluster]) {
    clusters.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.members.cmp(&b.members)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::CandidatePair;
    use crate::corpus::Span;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn id(k: usize) -> MentionId {
        MentionId::new("d", Span::new(k * 10, k * 10 + 1))
    }

    fn table(n: usize) -> MentionTable {
        MentionTable::new((0..n).map(|k| (id(k), format!("m{k}"))).collect())
    }

    fn edge(a: usize, b: usize, v: Verdict) -> PairDecision<f64> {
        PairDecision { pair: CandidatePair::new(id(a), id(b)).unwrap(), verdict: v, combined: 0.0 }
    }

    fn score(a: usize, b: usize, s: f64) -> PairScore<f64> {
        PairScore { pair: CandidatePair::new(id(a), id(b)).unwrap(), per_feature: BTreeMap::new(), combined: s }
    }

    fn member_sets(clusters: &[EntityCluster]) -> Vec<Vec<usize>> {
        clusters.iter().map(|c| c.members.iter().map(|m| m.start / 10).collect()).collect()
    }

    #[test]
    fn transitive_closure() {
        let d = [edge(0, 1, Verdict::Coreferent), edge(1, 2, Verdict::Coreferent), edge(2, 3, Verdict::Possible)];
        let c = connected_components(&d, &table(4)).unwrap();
        assert_eq!(member_sets(&c), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(c[0].id, "c000000");
        assert_eq!(c[1].id, "c000001");
        let none = connected_components::<f64>(&[], &table(3)).unwrap();
        assert_eq!(member_sets(&none), vec![vec![0], vec![1], vec![2]]);
        assert!(connected_components(&[edge(0, 9, Verdict::Coreferent)], &table(3)).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(canonical_label(["Obama", "B. Obama", "Barack Obama", "Barack Obamu"]), "Barack Obama");
        assert_eq!(canonical_label(["Zoë", "Zoe"]), "Zoe");
        assert_eq!(canonical_label(std::iter::empty()), "");
    }

    #[test]
    fn agglomerative_hand_trace() {
        // 0.90 (0,1) merges; 0.85 (0,2) merges; 0.80 (1,2) is internal;
        // 0.80 (2,3) merges; 0.60 (3,4) is below the stop threshold.
        let scores = [score(3, 4, 0.6), score(2, 3, 0.8), score(1, 2, 0.8), score(0, 2, 0.85), score(0, 1, 0.9)];
        let (clusters, merges) = agglomerative_single_link(&scores, &table(5), 0.7).unwrap();
        assert_eq!(member_sets(&clusters), vec![vec![0, 1, 2, 3], vec![4]]);
        let trace: Vec<_> = merges.iter().map(|m| (m.a.start / 10, m.b.start / 10, m.score)).collect();
        assert_eq!(trace, vec![(0, 1, 0.9), (0, 2, 0.85), (2, 3, 0.8)]);
    }

    #[test]
    fn agglomerative_tie_break() {
        // Equal scores merge in canonical pair order: (1,2) before (2,3).
        let scores = [score(2, 3, 0.8), score(1, 2, 0.8)];
        let (_, merges) = agglomerative_single_link(&scores, &table(4), 0.5).unwrap();
        assert_eq!(merges[0].a, id(1));
        assert_eq!(merges[1].a, id(2));
    }

    #[test]
    fn agglomerative_thresholds() {
        let scores = [score(0, 1, 0.99), score(2, 3, 0.2)];
        let (c, _) = agglomerative_single_link(&scores, &table(5), 1.0).unwrap();
        assert_eq!(c.len(), 5);
        let (c, _) = agglomerative_single_link(&scores, &table(5), 0.0).unwrap();
        assert_eq!(member_sets(&c), vec![vec![0, 1], vec![2, 3], vec![4]]);
    }

    #[test]
    fn streaming_distinct_surfaces() {
        let t = MentionTable::new(vec![
            (id(0), "Obama".into()),
            (id(1), "Clinton".into()),
            (id(2), "Obama".into()),
            (id(3), "Bush".into()),
        ]);
        let sim = |a: usize, b: usize| if t.surface(a) == t.surface(b) { 1.0 } else { 0.2 };
        let c = streaming_clusters(&t, sim, 10, 0.0).unwrap();
        assert_eq!(member_sets(&c), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(c[0].canonical_label, "Obama");
    }

    #[test]
    fn jsonl_round_trip() {
        let c = connected_components(&[edge(0, 1, Verdict::Coreferent)], &table(3)).unwrap();
        let mut buf = Vec::new();
        write_clusters_jsonl(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), r#"{"clusterId":"c000000","canonicalLabel":"m0","members":["d:0-1","d:10-11"]}"#);
        assert_eq!(read_clusters_jsonl(&buf[..]).unwrap(), c);
        assert!(read_clusters_jsonl(&b"{oops}\n"[..]).is_err());
    }

    fn reachability_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut r = vec![vec![false; n]; n];
        for i in 0..n {
            r[i][i] = true;
        }
        for &(a, b) in edges {
            r[a][b] = true;
            r[b][a] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if (0..i).all(|j| !r[i][j]) {
                groups.push((0..n).filter(|&j| r[i][j]).collect());
            }
        }
        groups
    }

    proptest! {
        #[test]
        fn components_match_reachability(
            (n, edges) in (1usize..=30).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..40))),
            seed in any::<u64>(),
        ) {
            let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
            let mut decisions: Vec<_> = edges.iter().map(|&(a, b)| edge(a, b, Verdict::Coreferent)).collect();
            let c = connected_components(&decisions, &table(n)).unwrap();
            prop_assert_eq!(member_sets(&c), reachability_oracle(n, &edges));
            // input order does not matter
            let len = decisions.len();
            if len > 1 {
                decisions.rotate_left((seed as usize) % len);
                decisions.reverse();
            }
            prop_assert_eq!(connected_components(&decisions, &table(n)).unwrap(), c);
        }
    }
}
