use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::block::pair_count;
use crate::cluster::EntityCluster;
use crate::extract::MentionId;
use crate::scalar::{f_measure, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T: Scalar> {
    pub precision: T,
    pub recall: T,
    pub f_measure: T,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Only meaningful for link counting: pairs linked on neither side.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tn: Option<u64>,
}

impl<T: Scalar> MetricReport<T> {
    pub fn new(precision: T, recall: T, tp: u64, fp: u64, fn_: u64) -> Self {
        Self { precision, recall, f_measure: f_measure(precision, recall), tp, fp, fn_, tn: None }
    }

    /// `key: value` lines, each key prefixed with `name.`.
    pub fn to_text(&self, name: &str) -> String {
        let mut s = format!(
            "{name}.precision: {}\n{name}.recall: {}\n{name}.f-measure: {}\n{name}.tp: {}\n{name}.fp: {}\n{name}.fn: {}\n",
            self.precision, self.recall, self.f_measure, self.tp, self.fp, self.fn_
        );
        if let Some(tn) = self.tn {
            s.push_str(&format!("{name}.tn: {tn}\n"));
        }
        s
    }
}

/// Assignment of items to cluster labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering<K: Ord = MentionId> {
    labels: BTreeMap<K, String>,
}

impl<K: Ord> Default for Clustering<K> {
    fn default() -> Self {
        Self { labels: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Clustering<K> {
    pub fn from_labels(labels: BTreeMap<K, String>) -> Self {
        Self { labels }
    }

    /// One label per group, `g0`, `g1`, ... Items listed twice keep the
    /// later group.
    pub fn from_groups<G, I>(groups: G) -> Self
    where
        G: IntoIterator<Item = I>,
        I: IntoIterator<Item = K>,
    {
        let mut labels = BTreeMap::new();
        for (k, g) in groups.into_iter().enumerate() {
            for item in g {
                labels.insert(item, format!("g{k}"));
            }
        }
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, item: &K) -> Option<&str> {
        self.labels.get(item).map(String::as_str)
    }

    pub fn items(&self) -> impl Iterator<Item = &K> {
        self.labels.keys()
    }

    pub fn labels(&self) -> &BTreeMap<K, String> {
        &self.labels
    }

    /// Clusters as sorted member lists, ordered by smallest member.
    pub fn groups(&self) -> Vec<Vec<K>> {
        let mut by_label: HashMap<&str, Vec<K>> = HashMap::new();
        for (k, l) in &self.labels {
            by_label.entry(l).or_default().push(k.clone());
        }
        let mut groups: Vec<Vec<K>> = by_label.into_values().collect();
        groups.sort();
        groups
    }

    /// Restrict to the items of `reference`; reference items missing here
    /// become singletons.
    pub fn aligned_to(&self, reference: &Clustering<K>) -> Clustering<K> {
        let mut labels = BTreeMap::new();
        for (n, item) in reference.items().enumerate() {
            let label = match self.labels.get(item) {
                Some(l) => format!("s:{l}"),
                None => format!("missing:{n}"),
            };
            labels.insert(item.clone(), label);
        }
        Clustering { labels }
    }
}

impl Clustering<MentionId> {
    pub fn from_clusters(clusters: &[EntityCluster]) -> Self {
        let mut labels = BTreeMap::new();
        for c in clusters {
            for m in &c.members {
                labels.insert(m.clone(), c.id.clone());
            }
        }
        Self { labels }
    }
}

fn check_same_items<K: Ord + Clone + std::fmt::Debug>(
    system: &Clustering<K>,
    gold: &Clustering<K>,
) -> Result<(), EvalError> {
    if system.labels.len() == gold.labels.len() && system.labels.keys().eq(gold.labels.keys()) {
        return Ok(());
    }
    let sys: BTreeSet<&K> = system.labels.keys().collect();
    let gld: BTreeSet<&K> = gold.labels.keys().collect();
    let only_sys = sys.difference(&gld).count();
    let only_gold = gld.difference(&sys).count();
    Err(EvalError::MentionMismatch { only_system: only_sys, only_gold })
}

/// Co-occurrence counts of (system label, gold label) plus cluster sizes.
struct Contingency {
    cells: HashMap<(usize, usize), u64>,
    sys_sizes: Vec<u64>,
    gold_sizes: Vec<u64>,
    /// `(system cluster, gold cluster)` per item.
    item_cells: Vec<(usize, usize)>,
}

fn contingency<K: Ord>(system: &Clustering<K>, gold: &Clustering<K>) -> Contingency {
    let mut sys_ids: HashMap<&str, usize> = HashMap::new();
    let mut gold_ids: HashMap<&str, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut sys_sizes = Vec::new();
    let mut gold_sizes = Vec::new();
    let mut item_cells = Vec::with_capacity(system.labels.len());
    for (s, g) in system.labels.values().zip(gold.labels.values()) {
        let n = sys_ids.len();
        let si = *sys_ids.entry(s).or_insert(n);
        if si == sys_sizes.len() {
            sys_sizes.push(0);
        }
        let n = gold_ids.len();
        let gi = *gold_ids.entry(g).or_insert(n);
        if gi == gold_sizes.len() {
            gold_sizes.push(0);
        }
        sys_sizes[si] += 1;
        gold_sizes[gi] += 1;
        *cells.entry((si, gi)).or_insert(0) += 1;
        item_cells.push((si, gi));
    }
    Contingency { cells, sys_sizes, gold_sizes, item_cells }
}

/// Pairwise link precision and recall over all within-cluster pairs.
///
/// A ratio with an empty denominator (no system links for precision, no gold
/// links for recall) is 1; its numerator is necessarily empty too.
pub fn link_f<T: Scalar, K: Ord + Clone + std::fmt::Debug>(
    system: &Clustering<K>,
    gold: &Clustering<K>,
) -> Result<MetricReport<T>, EvalError> {
    check_same_items(system, gold)?;
    let table = contingency(system, gold);
    let common: u64 = table.cells.values().map(|&n| pair_count(n as usize)).sum();
    let sys_links: u64 = table.sys_sizes.iter().map(|&n| pair_count(n as usize)).sum();
    let gold_links: u64 = table.gold_sizes.iter().map(|&n| pair_count(n as usize)).sum();
    let ratio = |num: u64, den: u64| if den == 0 { T::one() } else { T::lit(num as f64) / T::lit(den as f64) };
    let mut report = MetricReport::new(
        ratio(common, sys_links),
        ratio(common, gold_links),
        common,
        sys_links - common,
        gold_links - common,
    );
    report.tn = Some(pair_count(system.len()) + common - sys_links - gold_links);
    Ok(report)
}

/// B-cubed with uniform per-mention weights.
///
/// Counts are summed over mentions: `tp` is the total overlap
/// `|sys(m) ∩ gold(m)|`, `fp` and `fn` the remainders of `|sys(m)|` and
/// `|gold(m)|`.
pub fn bcubed<T: Scalar, K: Ord + Clone + std::fmt::Debug>(
    system: &Clustering<K>,
    gold: &Clustering<K>,
) -> Result<MetricReport<T>, EvalError> {
    check_same_items(system, gold)?;
    let n = system.len();
    if n == 0 {
        return Ok(MetricReport::new(T::one(), T::one(), 0, 0, 0));
    }
    let table = contingency(system, gold);
    let (mut p, mut r) = (T::zero(), T::zero());
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for &(s, g) in &table.item_cells {
        let common = table.cells[&(s, g)];
        let (ss, gs) = (table.sys_sizes[s], table.gold_sizes[g]);
        p = p + T::lit(common as f64) / T::lit(ss as f64);
        r = r + T::lit(common as f64) / T::lit(gs as f64);
        tp += common;
        fp += ss - common;
        fn_ += gs - common;
    }
    let n = T::from_count(n);
    Ok(MetricReport::new((p / n).unit(), (r / n).unit(), tp, fp, fn_))
}
