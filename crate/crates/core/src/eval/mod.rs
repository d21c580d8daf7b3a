//! Scoring system output against gold annotations.

mod metrics;

pub use metrics::{bcubed, link_f, Clustering, MetricReport};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::EntityCluster;
use crate::corpus::Span;
use crate::extract::{MajorType, Mention, MentionId};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("system and gold cover different mentions ({only_system} only in system, {only_gold} only in gold)")]
    MentionMismatch { only_system: usize, only_gold: usize },
    #[error("gold file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A gold mention for identification scoring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoldMention {
    pub doc_id: String,
    pub span: Span,
    pub major: MajorType,
}

impl From<&Mention> for GoldMention {
    fn from(m: &Mention) -> Self {
        Self { doc_id: m.id.doc_id.clone(), span: m.span(), major: m.entity_type.major }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldStandard {
    /// Mention id to gold entity id.
    pub labels: BTreeMap<MentionId, String>,
    pub mentions: BTreeSet<GoldMention>,
}

fn parse_err(line: usize, message: impl Into<String>) -> EvalError {
    EvalError::Parse { line, message: message.into() }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, l)| {
        let l = l.trim_end_matches('\r');
        (!l.trim().is_empty() && !l.starts_with('#')).then(|| (n + 1, l.split('\t').map(str::trim).collect()))
    })
}

impl GoldStandard {
    /// `mentionId TAB goldEntityId` lines.
    pub fn parse_labels(text: &str) -> Result<BTreeMap<MentionId, String>, EvalError> {
        let mut labels = BTreeMap::new();
        for (line, f) in data_lines(text) {
            if f.len() != 2 {
                return Err(parse_err(line, "expected mentionId<TAB>entityId"));
            }
            let id: MentionId = f[0].parse().map_err(|e: crate::extract::ExtractError| parse_err(line, e.to_string()))?;
            if f[1].is_empty() {
                return Err(parse_err(line, "empty entity id"));
            }
            if labels.insert(id, f[1].to_string()).is_some() {
                return Err(parse_err(line, format!("mention `{}` labelled twice", f[0])));
            }
        }
        Ok(labels)
    }

    /// `docId TAB start TAB end TAB type` lines.
    pub fn parse_mentions(text: &str) -> Result<BTreeSet<GoldMention>, EvalError> {
        let mut out = BTreeSet::new();
        for (line, f) in data_lines(text) {
            if f.len() != 4 {
                return Err(parse_err(line, "expected docId<TAB>start<TAB>end<TAB>type"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(line, format!("bad offset `{s}`")));
            let (start, end) = (num(f[1])?, num(f[2])?);
            if end < start {
                return Err(parse_err(line, "end before start"));
            }
            let major: MajorType = f[3].parse().map_err(|e: String| parse_err(line, e))?;
            out.insert(GoldMention { doc_id: f[0].to_string(), span: Span::new(start, end), major });
        }
        Ok(out)
    }

    pub fn load(labels: &Path, mentions: Option<&Path>) -> Result<Self, EvalError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| EvalError::Io { path: p.display().to_string(), source })
        };
        let labels = Self::parse_labels(&read(labels)?)?;
        let mentions = match mentions {
            Some(p) => Self::parse_mentions(&read(p)?)?,
            None => BTreeSet::new(),
        };
        Ok(Self { labels, mentions })
    }

    pub fn clustering(&self) -> Clustering {
        Clustering::from_labels(self.labels.clone())
    }

    pub fn labels_tsv(&self) -> String {
        self.labels.iter().map(|(m, e)| format!("{m}\t{e}\n")).collect()
    }

    pub fn mentions_tsv(&self) -> String {
        self.mentions
            .iter()
            .map(|g| format!("{}\t{}\t{}\t{}\n", g.doc_id, g.span.start, g.span.end, g.major))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    #[default]
    ExactSpan,
    Overlap,
}

impl std::str::FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "exact-span" => Ok(Self::ExactSpan),
            "overlap" => Ok(Self::Overlap),
            _ => Err(format!("unknown match mode `{s}`")),
        }
    }
}

/// Mention identification precision and recall.
///
/// Each system mention may match at most one gold mention of the same
/// document and type, scanning in document order. With nothing extracted
/// precision is 0; with no gold mentions recall is 1.
pub fn identification_prf<T: Scalar>(
    system: &[GoldMention],
    gold: &BTreeSet<GoldMention>,
    mode: MatchMode,
) -> MetricReport<T> {
    let correct = match mode {
        MatchMode::ExactSpan => {
            let sys: BTreeSet<&GoldMention> = system.iter().collect();
            sys.iter().filter(|m| gold.contains(**m)).count()
        }
        MatchMode::Overlap => {
            let mut sys: Vec<&GoldMention> = system.iter().collect();
            sys.sort();
            sys.dedup();
            let mut used: BTreeSet<&GoldMention> = BTreeSet::new();
            let mut correct = 0;
            for m in sys {
                let hit = gold.iter().find(|g| {
                    g.doc_id == m.doc_id && g.major == m.major && g.span.overlaps(&m.span) && !used.contains(g)
                });
                if let Some(g) = hit {
                    used.insert(g);
                    correct += 1;
                }
            }
            correct
        }
    };
    let extracted = system.iter().collect::<BTreeSet<_>>().len();
    let precision = if extracted == 0 { T::zero() } else { T::ratio(correct, extracted) };
    let recall = if gold.is_empty() { T::one() } else { T::ratio(correct, gold.len()) };
    let (c, e, g) = (correct as u64, extracted as u64, gold.len() as u64);
    if e == 0 && g == 0 {
        return MetricReport::new(T::one(), T::one(), 0, 0, 0);
    }
    MetricReport::new(precision, recall, c, e - c, g - c)
}

/// Full evaluation of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<T: Scalar> {
    pub gold_mentions: usize,
    pub system_mentions: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub identification: Option<MetricReport<T>>,
    pub link: MetricReport<T>,
    pub bcubed: MetricReport<T>,
}

impl<T: Scalar> EvalReport<T> {
    pub fn to_text(&self) -> String {
        let mut s = format!("gold-mentions: {}\nsystem-mentions: {}\n", self.gold_mentions, self.system_mentions);
        if let Some(id) = &self.identification {
            s.push_str(&id.to_text("identification"));
        }
        s.push_str(&self.link.to_text("link"));
        s.push_str(&self.bcubed.to_text("bcubed"));
        s
    }
}

/// Score clusters against gold labels.
///
/// The system clustering is restricted to the gold-labelled mentions, and
/// gold mentions the system never produced count as singletons, so
/// extraction misses lower recall rather than aborting the comparison.
/// Identification is scored when gold mentions are available.
pub fn evaluate<T: Scalar>(
    clusters: &[EntityCluster],
    system_mentions: &[GoldMention],
    gold: &GoldStandard,
    mode: MatchMode,
) -> Result<EvalReport<T>, EvalError> {
    let gold_clustering = gold.clustering();
    let system = Clustering::from_clusters(clusters).aligned_to(&gold_clustering);
    Ok(EvalReport {
        gold_mentions: gold.labels.len(),
        system_mentions: clusters.iter().map(|c| c.members.len()).sum(),
        identification: (!gold.mentions.is_empty()).then(|| identification_prf(system_mentions, &gold.mentions, mode)),
        link: link_f(&system, &gold_clustering)?,
        bcubed: bcubed(&system, &gold_clustering)?,
    })
}
