//! Document ingestion: format analysis and tokenization.

mod load;
mod markup;
mod tokenize;

pub use load::{load_corpus, CorpusFormat, IngestReport};
pub use markup::{decode_entities, split_markup_documents, strip_tags};
pub use tokenize::{tokenize, Span, Token, TokenKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simfns::CanonicalDate;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("record {record}: missing document id")]
    MissingId { record: String },
    #[error("record {record}: {message}")]
    Malformed { record: String, message: String },
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A format-analyzed document: metadata plus tag-free body text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub doc_type: String,
    pub timestamp: Option<CanonicalDate>,
    pub headline: Option<String>,
    pub body: String,
    pub source_path: String,
}

impl Document {
    pub fn plain(id: impl Into<String>, body: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            source_path: id.clone(),
            id,
            doc_type: String::new(),
            timestamp: None,
            headline: None,
            body: body.into(),
        }
    }
}

/// Format of a single raw document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Plain,
    Markup,
    JsonlRecord,
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<String>,
    #[serde(rename = "type", default)]
    doc_type: Option<String>,
    #[serde(default)]
    date: Option<serde_json::Value>,
    #[serde(default)]
    headline: Option<String>,
    #[serde(default)]
    body: Option<String>,
}

/// Turn one raw document into a [`Document`] with formatting removed.
///
/// `source` is the provenance string; it doubles as the id for plain text and
/// for markup without a `<DOC id="...">` attribute.
pub fn analyze_format(raw: &str, format: Format, source: &str) -> Result<Document, IngestError> {
    match format {
        Format::Plain => Ok(Document { source_path: source.to_string(), ..Document::plain(source, raw) }),
        Format::Markup => Ok(markup::parse_markup_document(raw, source)),
        Format::JsonlRecord => parse_json_record(raw, source),
    }
}

fn parse_json_record(raw: &str, source: &str) -> Result<Document, IngestError> {
    let malformed = |message: String| IngestError::Malformed { record: source.to_string(), message };
    let rec: JsonRecord = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
    let id = match rec.id {
        Some(id) if !id.trim().is_empty() => id,
        _ => return Err(IngestError::MissingId { record: source.to_string() }),
    };
    let timestamp = match rec.date {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::String(s)) if s.trim().is_empty() => None,
        Some(serde_json::Value::String(s)) => {
            Some(CanonicalDate::parse_iso(&s).map_err(|e| malformed(e.to_string()))?)
        }
        Some(serde_json::Value::Number(n)) => {
            let v = n.as_u64().and_then(|v| u32::try_from(v).ok());
            let date = v.and_then(|v| CanonicalDate::try_from(v).ok());
            Some(date.ok_or_else(|| malformed(format!("invalid date {n}")))?)
        }
        Some(other) => return Err(malformed(format!("invalid date {other}"))),
    };
    Ok(Document {
        id,
        doc_type: rec.doc_type.unwrap_or_default(),
        timestamp,
        headline: rec.headline.filter(|h| !h.is_empty()),
        body: rec.body.unwrap_or_default(),
        source_path: source.to_string(),
    })
}
