use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::corpus::Document;
use crate::extract::Mention;
use crate::simfns::{soundex, word_tokens, CanonicalDate, CorpusStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feature {
    /// Mention text as written.
    Surface,
    /// Lowercased word tokens of the surface, space-joined.
    NormalizedSurface,
    /// Soundex code of the first token of the surface that has a letter.
    Soundex,
    /// Word tokens around the mention.
    Context,
    Headline,
    Body,
    DocType,
    Date,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Entity,
    Document,
    Metadata,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::Surface,
        Feature::NormalizedSurface,
        Feature::Soundex,
        Feature::Context,
        Feature::Headline,
        Feature::Body,
        Feature::DocType,
        Feature::Date,
    ];

    pub fn level(self) -> Level {
        match self {
            Feature::Surface | Feature::NormalizedSurface | Feature::Soundex => Level::Entity,
            Feature::Context | Feature::Headline | Feature::Body => Level::Document,
            Feature::DocType | Feature::Date => Level::Metadata,
        }
    }

    pub fn kind(self) -> ValueKind {
        match self {
            Feature::Surface | Feature::NormalizedSurface | Feature::Soundex | Feature::DocType => ValueKind::Text,
            Feature::Context | Feature::Headline | Feature::Body => ValueKind::Tokens,
            Feature::Date => ValueKind::Date,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Surface => "surface",
            Feature::NormalizedSurface => "normalized-surface",
            Feature::Soundex => "soundex",
            Feature::Context => "context",
            Feature::Headline => "headline",
            Feature::Body => "body",
            Feature::DocType => "doc-type",
            Feature::Date => "date",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Text,
    Tokens,
    Date,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureValue {
    Text(String),
    Tokens(Vec<String>),
    Date(CanonicalDate),
}

/// Features of one mention, grouped by level. Absent features have no entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entity_level: BTreeMap<Feature, FeatureValue>,
    pub document_level: BTreeMap<Feature, FeatureValue>,
    pub metadata_level: BTreeMap<Feature, FeatureValue>,
}

impl FeatureVector {
    fn level_mut(&mut self, level: Level) -> &mut BTreeMap<Feature, FeatureValue> {
        match level {
            Level::Entity => &mut self.entity_level,
            Level::Document => &mut self.document_level,
            Level::Metadata => &mut self.metadata_level,
        }
    }

    pub fn get(&self, feature: Feature) -> Option<&FeatureValue> {
        match feature.level() {
            Level::Entity => self.entity_level.get(&feature),
            Level::Document => self.document_level.get(&feature),
            Level::Metadata => self.metadata_level.get(&feature),
        }
    }

    pub fn insert(&mut self, feature: Feature, value: FeatureValue) {
        self.level_mut(feature.level()).insert(feature, value);
    }

    pub fn len(&self) -> usize {
        self.entity_level.len() + self.document_level.len() + self.metadata_level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn tokens_value(tokens: Vec<String>) -> Option<FeatureValue> {
    (!tokens.is_empty()).then_some(FeatureValue::Tokens(tokens))
}

fn compute(feature: Feature, m: &Mention, doc: Option<&Document>) -> Option<FeatureValue> {
    match feature {
        Feature::Surface => Some(FeatureValue::Text(m.surface.clone())),
        Feature::NormalizedSurface => {
            let norm = word_tokens(&m.surface).join(" ");
            (!norm.is_empty()).then_some(FeatureValue::Text(norm))
        }
        Feature::Soundex => word_tokens(&m.surface)
            .iter()
            .find_map(|t| soundex(t).ok())
            .map(FeatureValue::Text),
        Feature::Context => tokens_value(m.context().flat_map(word_tokens).collect()),
        Feature::Headline => m.meta.headline.as_deref().and_then(|h| tokens_value(word_tokens(h))),
        Feature::Body => doc.and_then(|d| tokens_value(word_tokens(&d.body))),
        Feature::DocType => (!m.meta.doc_type.is_empty()).then(|| FeatureValue::Text(m.meta.doc_type.clone())),
        Feature::Date => m.meta.timestamp.map(FeatureValue::Date),
    }
}

/// Compute the requested features of `m`. `doc` is only needed for the body
/// feature.
pub fn featurize(m: &Mention, doc: Option<&Document>, features: &[Feature]) -> FeatureVector {
    let mut fv = FeatureVector::default();
    for &f in features {
        if let Some(v) = compute(f, m, doc) {
            fv.insert(f, v);
        }
    }
    fv
}

/// Per-feature document frequencies for tf-idf scored features.
///
/// Context and entity features count one document per mention; headline and
/// body count each source document once.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub stats: BTreeMap<Feature, CorpusStats>,
    seen_docs: BTreeMap<Feature, BTreeSet<String>>,
}

impl FeatureStats {
    pub fn new(features: impl IntoIterator<Item = Feature>) -> Self {
        let stats: BTreeMap<_, _> = features.into_iter().map(|f| (f, CorpusStats::default())).collect();
        Self { stats, seen_docs: BTreeMap::new() }
    }

    pub fn add(&mut self, doc_id: &str, fv: &FeatureVector) {
        for (&feature, stats) in &mut self.stats {
            if feature.level() == Level::Document && feature != Feature::Context {
                let seen = self.seen_docs.entry(feature).or_default();
                if !seen.insert(doc_id.to_string()) {
                    continue;
                }
            }
            match fv.get(feature) {
                Some(FeatureValue::Tokens(t)) => stats.add_document(t),
                Some(FeatureValue::Text(s)) => stats.add_document(word_tokens(s)),
                _ => {}
            }
        }
    }

    /// Combine statistics built over disjoint document sets.
    pub fn merge(&mut self, other: &FeatureStats) -> Result<(), ClassifyError> {
        for (f, docs) in &other.seen_docs {
            if let Some(d) = self.seen_docs.get(f).and_then(|here| docs.intersection(here).next()) {
                return Err(ClassifyError::Config(format!("document `{d}` counted in two statistics shards")));
            }
        }
        for (f, s) in &other.stats {
            self.stats.entry(*f).or_default().merge(s);
        }
        for (f, docs) in &other.seen_docs {
            self.seen_docs.entry(*f).or_default().extend(docs.iter().cloned());
        }
        Ok(())
    }

    pub fn get(&self, feature: Feature) -> Option<&CorpusStats> {
        self.stats.get(&feature)
    }
}
