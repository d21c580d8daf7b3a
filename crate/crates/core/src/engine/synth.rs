//! Synthetic corpora with exact gold labels.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Span};
use crate::eval::{GoldMention, GoldStandard};
use crate::extract::{EntityType, MajorType, MentionId, ORGANIZATION_DESIGNATORS, PERSON_TITLES};
use crate::simfns::{month_from_name, soundex, CanonicalDate};

/// Per-mention probabilities of each surface variation.
///
/// Abbreviation, initials and reorder are mutually exclusive and tried in
/// that order; a typo may be applied on top.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct NoiseModel {
    /// Organization acronym or titled person surname.
    pub abbreviation: f64,
    /// Person given name cut to an initial.
    pub initials: f64,
    /// First two name tokens swapped.
    pub reorder: f64,
    /// One character edit.
    pub typo: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthEntity {
    pub id: String,
    pub name: String,
    pub entity_type: EntityType,
    /// Acronym or titled surname, registered in the gazetteer.
    pub abbreviation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    pub entities: Vec<SynthEntity>,
    pub gold: GoldStandard,
    /// Canonical surface of the entity behind each gold mention.
    pub canonical: BTreeMap<MentionId, String>,
}

const SUBTYPES: [(MajorType, &[&str]); 3] = [
    (MajorType::Person, &["politician", "athlete", "musician", "scientist", "author", "actor"]),
    (MajorType::Organization, &["company", "university", "agency", "club", "bank"]),
    (MajorType::Location, &["city", "country", "river", "region", "island"]),
];

const ONSETS: [&str; 20] =
    ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gr", "kl", "st", "tr"];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];
const CODAS: [&str; 8] = ["", "", "n", "r", "l", "s", "th", "m"];
const ORG_WORDS: [&str; 8] = ["Systems", "Holdings", "Partners", "Dynamics", "Industries", "Media", "Labs", "Works"];

const FILLER: [&str; 60] = [
    "the", "a", "report", "said", "on", "after", "before", "while", "during", "with", "from", "about", "that",
    "this", "new", "old", "people", "group", "talks", "meeting", "plan", "visit", "statement", "officials",
    "week", "year", "today", "later", "early", "again", "announced", "described", "expected", "called",
    "in", "at", "by", "for", "of", "and", "but", "also", "still", "local", "national", "public", "record",
    "deal", "market", "season", "policy", "study", "trip", "game", "album", "film", "match", "event", "crowd",
    "press",
];

fn syllable(rng: &mut ChaCha8Rng) -> String {
    format!("{}{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap(), CODAS.choose(rng).unwrap())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// A capitalized two-syllable word the grammar treats as an ordinary name.
fn name_word(rng: &mut ChaCha8Rng) -> String {
    loop {
        let w = capitalize(&(syllable(rng) + &syllable(rng)));
        let reserved = PERSON_TITLES.contains(&w.as_str())
            || ORGANIZATION_DESIGNATORS.contains(&w.as_str())
            || month_from_name(&w).is_some()
            || FILLER.contains(&w.to_lowercase().as_str())
            || w.len() < 4;
        if !reserved {
            return w;
        }
    }
}

fn acronym(name: &str) -> String {
    name.split(' ').filter_map(|t| t.chars().next()).collect()
}

fn make_entities(rng: &mut ChaCha8Rng, n: usize) -> Vec<SynthEntity> {
    let mut codes = HashSet::new();
    let mut taken: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let width = n.to_string().len().max(4);
    while out.len() < n {
        let major = match rng.gen_range(0..10) {
            0..=4 => MajorType::Person,
            5..=7 => MajorType::Organization,
            _ => MajorType::Location,
        };
        let subtypes = SUBTYPES.iter().find(|(m, _)| *m == major).unwrap().1;
        let subtype = *subtypes.choose(rng).unwrap();
        let first = name_word(rng);
        let (name, abbreviation) = match major {
            MajorType::Person => {
                let last = name_word(rng);
                (format!("{first} {last}"), Some(format!("Mr {last}")))
            }
            MajorType::Organization => {
                let name = format!(
                    "{first} {} {}",
                    ORG_WORDS.choose(rng).unwrap(),
                    ORGANIZATION_DESIGNATORS.choose(rng).unwrap()
                );
                let abbr = acronym(&name);
                (name, Some(abbr))
            }
            _ => (first.clone(), None),
        };
        let code = soundex(&first).expect("name has letters");
        let fresh = |s: &String| !taken.contains(s);
        if codes.contains(&code) || !fresh(&name) || !fresh(&first) || !abbreviation.as_ref().is_none_or(fresh) {
            continue;
        }
        codes.insert(code);
        taken.insert(name.clone());
        taken.insert(first);
        if let Some(a) = &abbreviation {
            taken.insert(a.clone());
        }
        out.push(SynthEntity {
            id: format!("e{:0width$}", out.len()),
            name,
            entity_type: EntityType::new(major, subtype),
            abbreviation,
        });
    }
    out
}

fn letter(rng: &mut ChaCha8Rng) -> char {
    (b'a' + rng.gen_range(0..26u8)) as char
}

/// One random character edit inside a lowercase stretch of the name, never
/// touching a token's first letter or an organization designator.
fn typo(rng: &mut ChaCha8Rng, surface: &str) -> String {
    let tokens: Vec<&str> = surface.split(' ').collect();
    let editable: Vec<usize> = (0..tokens.len())
        .filter(|&k| {
            let t = tokens[k];
            t.len() >= 3 && t.chars().skip(1).all(|c| c.is_ascii_lowercase()) && !ORGANIZATION_DESIGNATORS.contains(&t)
        })
        .collect();
    let Some(&k) = editable.choose(rng) else { return surface.to_string() };
    let mut chars: Vec<char> = tokens[k].chars().collect();
    loop {
        let mut c = chars.clone();
        let pos = rng.gen_range(1..c.len());
        match rng.gen_range(0..4) {
            0 => c[pos] = letter(rng),
            1 => c.insert(pos, letter(rng)),
            2 if c.len() > 3 => {
                c.remove(pos);
            }
            3 if pos + 1 < c.len() => c.swap(pos, pos + 1),
            _ => continue,
        }
        if c != chars {
            chars = c;
            break;
        }
    }
    let edited: String = chars.into_iter().collect();
    tokens.iter().enumerate().map(|(i, t)| if i == k { edited.as_str() } else { t }).collect::<Vec<_>>().join(" ")
}

fn variant(rng: &mut ChaCha8Rng, e: &SynthEntity, noise: &NoiseModel) -> String {
    let tokens: Vec<&str> = e.name.split(' ').collect();
    let roll = |rng: &mut ChaCha8Rng, p: f64| p > 0.0 && rng.gen_bool(p.min(1.0));
    let mut s = if roll(rng, noise.abbreviation) && e.abbreviation.is_some() {
        e.abbreviation.clone().unwrap()
    } else if roll(rng, noise.initials) && e.entity_type.major == MajorType::Person {
        format!("{}. {}", &tokens[0][..1], tokens[1..].join(" "))
    } else if roll(rng, noise.reorder) && tokens.len() >= 2 {
        let mut t = tokens.clone();
        let swap_end = if e.entity_type.major == MajorType::Organization { t.len() - 1 } else { t.len() };
        if swap_end >= 2 {
            t.swap(0, 1);
        }
        t.join(" ")
    } else {
        e.name.clone()
    };
    if roll(rng, noise.typo) {
        s = typo(rng, &s);
    }
    s
}

/// Generate `n_docs` documents mentioning `n_entities` synthetic entities.
///
/// Each document holds three to five sentences of lowercase filler with one
/// entity mention each, never at the start of a sentence. Entity names are
/// unique and the Soundex codes of their first tokens are pairwise distinct.
/// The same seed always yields the same corpus.
pub fn synth_corpus(seed: u64, n_docs: usize, n_entities: usize, noise: &NoiseModel) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entities = make_entities(&mut rng, n_entities);
    let width = n_docs.to_string().len().max(4);
    let mut documents = Vec::with_capacity(n_docs);
    let mut gold = GoldStandard::default();
    let mut canonical = BTreeMap::new();
    for d in 0..n_docs {
        let id = format!("doc{d:0width$}");
        let mut body = String::new();
        let sentences = if entities.is_empty() { 0 } else { rng.gen_range(3..=5) };
        for _ in 0..sentences {
            let e = entities.choose(&mut rng).unwrap();
            for _ in 0..rng.gen_range(3..=7) {
                body.push_str(FILLER.choose(&mut rng).unwrap());
                body.push(' ');
            }
            let surface = variant(&mut rng, e, noise);
            let span = Span::new(body.len(), body.len() + surface.len());
            body.push_str(&surface);
            for _ in 0..rng.gen_range(2..=6) {
                body.push(' ');
                body.push_str(FILLER.choose(&mut rng).unwrap());
            }
            body.push_str(". ");
            let mid = MentionId::new(id.clone(), span);
            gold.labels.insert(mid.clone(), e.id.clone());
            gold.mentions.insert(GoldMention { doc_id: id.clone(), span, major: e.entity_type.major });
            canonical.insert(mid, e.name.clone());
        }
        let month = rng.gen_range(1..=12);
        let day = rng.gen_range(1..=28);
        documents.push(Document {
            doc_type: "news".into(),
            timestamp: CanonicalDate::from_ymd(rng.gen_range(2009..=2012), month, day),
            headline: None,
            body: body.trim_end().to_string(),
            source_path: id.clone(),
            id,
        });
    }
    SynthCorpus { documents, entities, gold, canonical }
}

impl SynthCorpus {
    pub fn mention_count(&self) -> usize {
        self.gold.labels.len()
    }

    /// `surface TAB type TAB subtype` lines for canonical names and
    /// abbreviations.
    pub fn gazetteer_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entities {
            for s in std::iter::once(&e.name).chain(&e.abbreviation) {
                out.push_str(&format!("{s}\t{}\t{}\n", e.entity_type.major, e.entity_type.subtype));
            }
        }
        out
    }

    /// One JSON record per document.
    pub fn corpus_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            let rec = serde_json::json!({
                "id": d.id,
                "type": d.doc_type,
                "date": d.timestamp.map(|t| t.value()),
                "body": d.body,
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }

    /// Write `corpus.jsonl`, `gazetteer.tsv`, `gold.tsv`, `gold-mentions.tsv`
    /// and a `pipeline.toml` that runs over them.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("corpus.jsonl"), self.corpus_jsonl())?;
        fs::write(dir.join("gazetteer.tsv"), self.gazetteer_tsv())?;
        fs::write(dir.join("gold.tsv"), self.gold.labels_tsv())?;
        fs::write(dir.join("gold-mentions.tsv"), self.gold.mentions_tsv())?;
        fs::write(
            dir.join("pipeline.toml"),
            "corpus = \"corpus.jsonl\"\nformat = \"jsonl\"\ngazetteer = \"gazetteer.tsv\"\nout = \"out\"\n",
        )
    }

    /// Share of mentions whose surface differs from the canonical name.
    pub fn noisy_fraction(&self) -> f64 {
        if self.canonical.is_empty() {
            return 0.0;
        }
        let surface = |id: &MentionId| {
            let doc = self.documents.iter().find(|d| d.id == id.doc_id).expect("gold doc exists");
            &doc.body[id.start..id.end]
        };
        let noisy = self.canonical.iter().filter(|(id, name)| surface(id) != name.as_str()).count();
        noisy as f64 / self.canonical.len() as f64
    }

    pub fn subtypes(&self) -> BTreeSet<&EntityType> {
        self.entities.iter().map(|e| &e.entity_type).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{extract_mentions, ExtractConfig, Gazetteer};
    use crate::simfns::edit_distance;

    #[test]
    fn same_seed_same_corpus() {
        let noise = NoiseModel { typo: 0.2, abbreviation: 0.2, ..NoiseModel::none() };
        let a = synth_corpus(7, 30, 10, &noise);
        let b = synth_corpus(7, 30, 10, &noise);
        assert_eq!(a.corpus_jsonl(), b.corpus_jsonl());
        assert_eq!(a.gold, b.gold);
        assert_ne!(a.corpus_jsonl(), synth_corpus(8, 30, 10, &noise).corpus_jsonl());
    }

    #[test]
    fn noise_free_surfaces_are_canonical() {
        let c = synth_corpus(1, 100, 20, &NoiseModel::none());
        assert!(c.mention_count() >= 300);
        assert_eq!(c.noisy_fraction(), 0.0);
    }

    #[test]
    fn typo_rate_holds_over_many_mentions() {
        let c = synth_corpus(3, 400, 50, &NoiseModel { typo: 0.1, ..NoiseModel::none() });
        assert!(c.mention_count() >= 1000);
        for (id, name) in &c.canonical {
            let doc = c.documents.iter().find(|d| d.id == id.doc_id).unwrap();
            let s = &doc.body[id.start..id.end];
            assert!(s == name || edit_distance(s, name) >= 1);
        }
        let rate = c.noisy_fraction();
        assert!((rate - 0.1).abs() <= 0.03, "typo rate {rate}");
    }

    #[test]
    fn first_token_codes_distinct() {
        let c = synth_corpus(5, 1, 200, &NoiseModel::none());
        let codes: HashSet<String> =
            c.entities.iter().map(|e| soundex(e.name.split(' ').next().unwrap()).unwrap()).collect();
        assert_eq!(codes.len(), 200);
    }

    #[test]
    fn extractor_recovers_gold_spans() {
        let c = synth_corpus(11, 60, 15, &NoiseModel::none());
        let gaz = Gazetteer::parse(&c.gazetteer_tsv(), false).unwrap();
        let mut found = BTreeSet::new();
        for d in &c.documents {
            for m in extract_mentions(d, &gaz, &ExtractConfig::default()) {
                found.insert(GoldMention::from(&m));
            }
        }
        assert_eq!(found, c.gold.mentions);
    }

    #[test]
    fn variants_parse_as_single_mentions() {
        let noise = NoiseModel { abbreviation: 0.3, initials: 0.3, reorder: 0.3, typo: 0.3 };
        let c = synth_corpus(13, 80, 20, &noise);
        let gaz = Gazetteer::parse(&c.gazetteer_tsv(), false).unwrap();
        let mut spans = BTreeSet::new();
        for d in &c.documents {
            for m in extract_mentions(d, &gaz, &ExtractConfig::default()) {
                spans.insert((m.id.doc_id.clone(), m.span()));
            }
        }
        let gold: BTreeSet<_> = c.gold.mentions.iter().map(|g| (g.doc_id.clone(), g.span)).collect();
        assert_eq!(spans, gold);
    }

    #[test]
    fn zero_documents() {
        let c = synth_corpus(1, 0, 5, &NoiseModel::none());
        assert!(c.documents.is_empty() && c.gold.labels.is_empty());
    }
}
