//! Similarity functions for character, token, phonetic, numeric, date and
//! categorical values.
//!
//! Functions named `*_distance` return raw distances; everything else returns
//! a score in `[0, 1]` where 1 means identical.

mod categorical;
mod date;
mod edit;
mod jaro;
mod numeric;
mod phonetic;
mod qgram;
mod token;

pub use categorical::{categorical_similarity, AliasTable, CategoryTable};
pub use date::{date_similarity, month_from_name, normalize_date, CanonicalDate, DateFormat};
pub use edit::{edit_distance, edit_similarity};
pub use jaro::{jaro, jaro_winkler, DEFAULT_PREFIX_SCALE};
pub use numeric::{hamming_distance, relative_distance};
pub use phonetic::{phonetic_equal, soundex};
pub use qgram::{qgram_similarity, qgrams, QGramConfig, QGramDenominator};
pub use token::{
    jaccard, jaccard_sets, tfidf_cosine, tfidf_cosine_tokens, word_tokens, CorpusStats, TfIdfVector, Tokenizer,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cannot encode `{0}`: no ASCII letters")]
    Encoding(String),
    #[error("cannot parse date `{0}`")]
    Date(String),
}
