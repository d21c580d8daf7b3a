//! Mention extraction: gazetteer lookup plus hand-written grammar rules.

mod gazetteer;
mod grammar;

pub use gazetteer::{gazetteer_lookup, Gazetteer, MAX_NGRAM};
pub use grammar::{apply_grammar, ORGANIZATION_DESIGNATORS, PERSON_TITLES};

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{tokenize, Document, Span, Token};
use crate::simfns::CanonicalDate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("gazetteer: {0}")]
    Gazetteer(String),
    #[error("bad mention id `{0}`")]
    MentionId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MajorType {
    Person,
    Organization,
    Location,
    Date,
    Time,
    Money,
    Percent,
}

impl MajorType {
    pub const ALL: [MajorType; 7] = [
        MajorType::Person,
        MajorType::Organization,
        MajorType::Location,
        MajorType::Date,
        MajorType::Time,
        MajorType::Money,
        MajorType::Percent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MajorType::Person => "person",
            MajorType::Organization => "organization",
            MajorType::Location => "location",
            MajorType::Date => "date",
            MajorType::Time => "time",
            MajorType::Money => "money",
            MajorType::Percent => "percent",
        }
    }
}

impl fmt::Display for MajorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MajorType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        MajorType::ALL
            .into_iter()
            .find(|t| t.as_str() == lower)
            .ok_or_else(|| format!("unknown entity type `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityType {
    pub major: MajorType,
    #[serde(default)]
    pub subtype: String,
}

impl EntityType {
    pub fn new(major: MajorType, subtype: impl Into<String>) -> Self {
        Self { major, subtype: subtype.into() }
    }

    pub fn major(major: MajorType) -> Self {
        Self::new(major, "")
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.subtype.is_empty() {
            write!(f, "{}", self.major)
        } else {
            write!(f, "{}/{}", self.major, self.subtype)
        }
    }
}

/// Corpus-unique mention identifier, written `doc:start-end`.
///
/// Ordering is by document id, then span; this is the canonical order used
/// for pairs and clusters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MentionId {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
}

impl MentionId {
    pub fn new(doc_id: impl Into<String>, span: Span) -> Self {
        Self { doc_id: doc_id.into(), start: span.start, end: span.end }
    }

    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

impl fmt::Display for MentionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}", self.doc_id, self.start, self.end)
    }
}

impl FromStr for MentionId {
    type Err = ExtractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExtractError::MentionId(s.to_string());
        let (doc, span) = s.rsplit_once(':').ok_or_else(bad)?;
        let (a, b) = span.split_once('-').ok_or_else(bad)?;
        let start: usize = a.parse().map_err(|_| bad())?;
        let end: usize = b.parse().map_err(|_| bad())?;
        if doc.is_empty() || end < start {
            return Err(bad());
        }
        Ok(Self { doc_id: doc.to_string(), start, end })
    }
}

impl Serialize for MentionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MentionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Document metadata carried by every mention.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_type: String,
    pub timestamp: Option<CanonicalDate>,
    pub headline: Option<String>,
}

impl DocMeta {
    pub fn of(doc: &Document) -> Self {
        Self { doc_type: doc.doc_type.clone(), timestamp: doc.timestamp, headline: doc.headline.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub id: MentionId,
    pub surface: String,
    pub entity_type: EntityType,
    /// Up to `W` tokens before the mention, in text order.
    pub left_context: Vec<String>,
    /// Up to `W` tokens after the mention.
    pub right_context: Vec<String>,
    pub meta: DocMeta,
}

impl Mention {
    pub fn doc_id(&self) -> &str {
        &self.id.doc_id
    }

    pub fn span(&self) -> Span {
        self.id.span()
    }

    pub fn context(&self) -> impl Iterator<Item = &str> {
        self.left_context.iter().chain(&self.right_context).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Gazetteer,
    Grammar,
}

/// A typed span before overlap resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub span: Span,
    /// Token index range covered by the span.
    pub tokens: Range<usize>,
    pub entity_type: EntityType,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ExtractConfig {
    pub context_window: usize,
    /// Type for capitalized runs with no title or designator.
    pub default_type: MajorType,
    pub case_sensitive: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { context_window: 10, default_type: MajorType::Person, case_sensitive: false }
    }
}

/// Resolve overlaps: gazetteer first, then longer spans, then leftmost.
pub fn resolve_overlaps(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        a.origin
            .cmp(&b.origin)
            .then(b.span.len().cmp(&a.span.len()))
            .then(a.span.start.cmp(&b.span.start))
    });
    let mut kept: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if !kept.iter().any(|k| k.span.overlaps(&c.span)) {
            kept.push(c);
        }
    }
    kept.sort_by_key(|c| c.span.start);
    kept
}

fn window(tokens: &[Token]) -> Vec<String> {
    tokens.iter().map(|t| t.text.clone()).collect()
}

pub fn extract_mentions(doc: &Document, gaz: &Gazetteer, config: &ExtractConfig) -> Vec<Mention> {
    let tokens = tokenize(&doc.body);
    let mut candidates = gazetteer_lookup(&tokens, gaz);
    candidates.extend(apply_grammar(&tokens, config.default_type));
    let meta = DocMeta::of(doc);
    let w = config.context_window;
    resolve_overlaps(candidates)
        .into_iter()
        .map(|c| Mention {
            id: MentionId::new(&doc.id, c.span),
            surface: doc.body[c.span.start..c.span.end].to_string(),
            entity_type: c.entity_type,
            left_context: window(&tokens[c.tokens.start.saturating_sub(w)..c.tokens.start]),
            right_context: window(&tokens[c.tokens.end..(c.tokens.end + w).min(tokens.len())]),
            meta: meta.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(body: &str, gaz: &str) -> Vec<(String, MajorType)> {
        let gaz = Gazetteer::parse(gaz, false).unwrap();
        extract_mentions(&Document::plain("d", body), &gaz, &ExtractConfig::default())
            .into_iter()
            .map(|m| (m.surface, m.entity_type.major))
            .collect()
    }

    #[test]
    fn obama_sentence() {
        let found = run(
            "Obama was born on August 4, 1961, at Gynecological Hospital in Honolulu",
            "obama\tperson\nhonolulu\tlocation\ngynecological hospital\torganization\n",
        );
        assert_eq!(
            found,
            vec![
                ("Obama".into(), MajorType::Person),
                ("August 4, 1961".into(), MajorType::Date),
                ("Gynecological Hospital".into(), MajorType::Organization),
                ("Honolulu".into(), MajorType::Location),
            ]
        );
    }

    #[test]
    fn empty_body() {
        assert!(run("", "obama\tperson\n").is_empty());
    }

    #[test]
    fn gazetteer_beats_grammar_on_overlap() {
        // "The" is sentence-initial and dropped; "World Cup" is a grammar run
        // too, but the gazetteer span wins. "England" only comes from grammar.
        let found = run("The World Cup took place in England", "world cup\torganization\n");
        assert_eq!(
            found,
            vec![("World Cup".into(), MajorType::Organization), ("England".into(), MajorType::Person)]
        );
    }

    #[test]
    fn longer_then_leftmost() {
        let c = |s, e, o| Candidate {
            span: Span::new(s, e),
            tokens: 0..0,
            entity_type: EntityType::major(MajorType::Person),
            origin: o,
        };
        let kept = resolve_overlaps(vec![c(0, 5, Origin::Grammar), c(3, 12, Origin::Grammar)]);
        assert_eq!(kept, vec![c(3, 12, Origin::Grammar)]);
        let kept = resolve_overlaps(vec![c(4, 8, Origin::Grammar), c(0, 4, Origin::Grammar), c(2, 6, Origin::Grammar)]);
        assert_eq!(kept, vec![c(0, 4, Origin::Grammar), c(4, 8, Origin::Grammar)]);
        let kept = resolve_overlaps(vec![c(0, 20, Origin::Grammar), c(5, 7, Origin::Gazetteer)]);
        assert_eq!(kept, vec![c(5, 7, Origin::Gazetteer)]);
    }

    #[test]
    fn context_windows() {
        let gaz = Gazetteer::parse("obama\tperson\n", false).unwrap();
        let cfg = ExtractConfig { context_window: 2, ..ExtractConfig::default() };
        let m = &extract_mentions(&Document::plain("d", "we met obama in the park"), &gaz, &cfg)[0];
        assert_eq!(m.left_context, ["we", "met"]);
        assert_eq!(m.right_context, ["in", "the"]);
        assert_eq!(m.id.to_string(), "d:7-12");
    }

    #[test]
    fn mention_id_round_trip() {
        let id: MentionId = "nyt/2001:01.txt:10-22".parse().unwrap();
        assert_eq!(id.doc_id, "nyt/2001:01.txt");
        assert_eq!((id.start, id.end), (10, 22));
        assert_eq!(serde_json::to_string(&id).unwrap(), "\"nyt/2001:01.txt:10-22\"");
        assert!("doc:5-2".parse::<MentionId>().is_err());
        assert!("doc".parse::<MentionId>().is_err());
        assert!(":1-2".parse::<MentionId>().is_err());
    }

    #[test]
    fn major_type_names() {
        for t in MajorType::ALL {
            assert_eq!(t.as_str().parse::<MajorType>().unwrap(), t);
        }
        assert!("planet".parse::<MajorType>().is_err());
    }

    const GAZ: &str = "obama\tperson\nnew york\tlocation\nacme corp\torganization\n";

    proptest! {
        #[test]
        fn mentions_are_disjoint_substrings(
            words in proptest::collection::vec(
                prop_oneof![
                    Just("Obama"), Just("New"), Just("York"), Just("Acme"), Just("Corp"),
                    Just("the"), Just("said"), Just("."), Just("Mr"), Just("August"),
                    Just("4"), Just(","), Just("1961"), Just("$"), Just("12"), Just("%"),
                    Just("Dr."), Just("Smith"), Just("10:30"), Just("2001-02-03"),
                ],
                0..40,
            ),
            glue in proptest::collection::vec(prop_oneof![Just(" "), Just("")], 40),
        ) {
            let mut body = String::new();
            for (i, w) in words.iter().enumerate() {
                body.push_str(w);
                body.push_str(glue[i]);
            }
            let gaz = Gazetteer::parse(GAZ, false).unwrap();
            let doc = Document::plain("d", body.clone());
            let a = extract_mentions(&doc, &gaz, &ExtractConfig::default());
            let b = extract_mentions(&doc, &gaz, &ExtractConfig::default());
            prop_assert_eq!(&a, &b);
            for m in &a {
                prop_assert_eq!(&body[m.id.start..m.id.end], m.surface.as_str());
                prop_assert!(!m.surface.is_empty());
            }
            for pair in a.windows(2) {
                prop_assert!(pair[0].id.end <= pair[1].id.start);
            }
        }
    }
}
