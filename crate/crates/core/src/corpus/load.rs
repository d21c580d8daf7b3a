use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::{analyze_format, markup, Document, Format, IngestError};

/// On-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// Directory of `.txt` files; id = path relative to the directory.
    Text,
    /// One JSON document per line.
    Jsonl,
    /// A markup file (or directory of them) with `<DOC>` blocks.
    Markup,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" | "txt" | "plain" => Ok(Self::Text),
            "jsonl" => Ok(Self::Jsonl),
            "markup" | "sgml" => Ok(Self::Markup),
            _ => Err(format!("unknown corpus format `{s}` (expected text, jsonl or markup)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub files: usize,
    pub documents: usize,
    /// Invalid UTF-8 sequences replaced with U+FFFD.
    pub invalid_utf8: usize,
}

fn read_lossy(path: &Path, report: &mut IngestReport) -> Result<String, IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    report.files += 1;
    report.invalid_utf8 += bytes.utf8_chunks().filter(|c| !c.invalid().is_empty()).count();
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn files_under(root: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<std::path::PathBuf>, IngestError> {
    if root.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| IngestError::Io {
            path: root.display().to_string(),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
        })?;
        if entry.file_type().is_file() && keep(entry.path()) {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

/// Load every document under `path`, sorted by id.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<(Vec<Document>, IngestReport), IngestError> {
    let mut report = IngestReport::default();
    let mut docs = Vec::new();
    if !path.exists() {
        return Err(IngestError::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "corpus path does not exist"),
        });
    }

    match format {
        CorpusFormat::Text => {
            let base = if path.is_file() { path.parent().unwrap_or(Path::new("")) } else { path };
            for file in files_under(path, |p| p.extension().is_some_and(|e| e == "txt"))? {
                let raw = read_lossy(&file, &mut report)?;
                let rel = file.strip_prefix(base).unwrap_or(&file);
                let id = rel.to_string_lossy().replace('\\', "/");
                let mut doc = analyze_format(&raw, Format::Plain, &id)?;
                doc.source_path = file.display().to_string();
                docs.push(doc);
            }
        }
        CorpusFormat::Jsonl => {
            for file in files_under(path, |p| p.extension().is_some_and(|e| e == "jsonl"))? {
                let raw = read_lossy(&file, &mut report)?;
                for (n, line) in raw.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let record = format!("{}:{}", file.display(), n + 1);
                    docs.push(analyze_format(line, Format::JsonlRecord, &record)?);
                }
            }
        }
        CorpusFormat::Markup => {
            for file in files_under(path, |_| true)? {
                let raw = read_lossy(&file, &mut report)?;
                let blocks = markup::split_markup_documents(&raw);
                let single = blocks.len() == 1;
                for (n, block) in blocks.into_iter().enumerate() {
                    let source = if single {
                        file.display().to_string()
                    } else {
                        format!("{}#{}", file.display(), n + 1)
                    };
                    docs.push(markup::parse_markup_document(block, &source));
                }
            }
        }
    }

    let mut seen = HashSet::new();
    for d in &docs {
        if !seen.insert(d.id.as_str()) {
            return Err(IngestError::DuplicateId(d.id.clone()));
        }
    }
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    report.documents = docs.len();
    Ok((docs, report))
}
