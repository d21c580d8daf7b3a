//! Token-based similarity: Jaccard and tf-idf cosine.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::scalar::Scalar;

/// How strings are split into tokens for token-based functions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenizer {
    /// Lowercased alphanumeric runs; punctuation dropped.
    #[default]
    Words,
    /// Lowercased whitespace-separated chunks, punctuation kept.
    Whitespace,
}

impl Tokenizer {
    pub fn tokens(self, s: &str) -> Vec<String> {
        match self {
            Tokenizer::Words => word_tokens(s),
            Tokenizer::Whitespace => s.split_whitespace().map(str::to_lowercase).collect(),
        }
    }
}

/// Lowercased alphanumeric runs of `s`.
pub fn word_tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// `|S ∩ T| / |S ∪ T|` over token sets; two empty sets score 1.
pub fn jaccard<T: Scalar>(a: &str, b: &str, tokenizer: Tokenizer) -> T {
    let sa: BTreeSet<String> = tokenizer.tokens(a).into_iter().collect();
    let sb: BTreeSet<String> = tokenizer.tokens(b).into_iter().collect();
    jaccard_sets(&sa, &sb)
}

/// Jaccard over already-built sets.
pub fn jaccard_sets<T: Scalar, K: Ord>(a: &BTreeSet<K>, b: &BTreeSet<K>) -> T {
    if a.is_empty() && b.is_empty() {
        return T::one();
    }
    let common = a.intersection(b).count();
    T::ratio(common, a.len() + b.len() - common)
}

/// Document frequencies for idf weighting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub doc_freq: BTreeMap<String, u64>,
}

impl CorpusStats {
    /// Build from one token list per document; repeats within a document
    /// count once.
    pub fn from_token_lists<I, D, S>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut stats = Self::default();
        for doc in docs {
            stats.add_document(doc);
        }
        stats
    }

    pub fn add_document<D, S>(&mut self, tokens: D)
    where
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.doc_count += 1;
        let unique: BTreeSet<String> = tokens.into_iter().map(|t| t.as_ref().to_string()).collect();
        for t in unique {
            *self.doc_freq.entry(t).or_insert(0) += 1;
        }
    }

    /// Union of two partial statistics (documents disjoint).
    pub fn merge(&mut self, other: &CorpusStats) {
        self.doc_count += other.doc_count;
        for (t, df) in &other.doc_freq {
            *self.doc_freq.entry(t.clone()).or_insert(0) += df;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.doc_count == 0
    }

    /// `ln(N / df)` with unseen tokens given `df = 1`.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.doc_freq.get(token).copied().unwrap_or(1).max(1);
        (self.doc_count as f64 / df as f64).ln()
    }

    /// Unit-length tf-idf vector of a token list.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> Result<TfIdfVector, SimError> {
        if self.is_empty() {
            return Err(SimError::Config("tf-idf statistics are empty (N = 0)".into()));
        }
        let mut tf: HashMap<&str, u32> = HashMap::new();
        for t in tokens {
            *tf.entry(t.as_ref()).or_insert(0) += 1;
        }
        let mut weights: Vec<(u64, f64)> = tf
            .into_iter()
            .map(|(t, n)| (term_key(t), f64::from(n) * self.idf(t)))
            .filter(|(_, w)| *w != 0.0)
            .collect();
        weights.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut weights {
                *w /= norm;
            }
        }
        Ok(TfIdfVector { weights })
    }
}

fn term_key(term: &str) -> u64 {
    // `DefaultHasher::new` is keyed identically for every instance.
    let mut h = std::hash::DefaultHasher::new();
    term.hash(&mut h);
    h.finish()
}

/// Sparse unit vector keyed by hashed term; empty when every weight is 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfIdfVector {
    weights: Vec<(u64, f64)>,
}

impl TfIdfVector {
    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    /// Cosine of the angle between two unit vectors; 0 when either is zero.
    pub fn cosine<T: Scalar>(&self, other: &TfIdfVector) -> T {
        let (a, b) = (&self.weights, &other.weights);
        if a.is_empty() || b.is_empty() {
            return T::zero();
        }
        if a == b {
            return T::one();
        }
        let (mut i, mut j, mut dot) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        T::lit(dot).unit()
    }
}

/// Cosine of the tf-idf vectors of two strings (word tokenizer).
pub fn tfidf_cosine<T: Scalar>(a: &str, b: &str, stats: &CorpusStats) -> Result<T, SimError> {
    tfidf_cosine_tokens(&word_tokens(a), &word_tokens(b), stats)
}

/// Cosine of the tf-idf vectors of two token lists.
pub fn tfidf_cosine_tokens<T: Scalar, S: AsRef<str>>(a: &[S], b: &[S], stats: &CorpusStats) -> Result<T, SimError> {
    Ok(stats.vectorize(a)?.cosine(&stats.vectorize(b)?))
}
