//! Minimal SGML-style markup handling for Gigaword-like files.
//!
//! Not a general SGML parser: tags are stripped, `<DOC>` attributes and the
//! `<HEADLINE>`, `<DATE>` and `<TEXT>` blocks are recognized.

use super::Document;
use crate::simfns::{normalize_date, CanonicalDate, DateFormat};

/// Remove every `<...>` sequence. A `<` with no closing `>` is kept as text.
pub fn strip_tags(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        match rest[open..].find('>') {
            Some(close) => rest = &rest[open + close + 1..],
            None => {
                out.push_str(&rest[open..]);
                return out;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Decode `&amp; &lt; &gt; &quot; &apos;`. Other entities are left as-is.
pub fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let decoded = [("&amp;", '&'), ("&lt;", '<'), ("&gt;", '>'), ("&quot;", '"'), ("&apos;", '\'')]
            .iter()
            .find(|(ent, _)| rest.starts_with(ent));
        match decoded {
            Some((ent, c)) => {
                out.push(*c);
                rest = &rest[ent.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn clean(s: &str) -> String {
    decode_entities(&strip_tags(s))
}

/// Split a markup file into its `<DOC>...</DOC>` blocks. A file without any
/// `<DOC` tag is a single document.
pub fn split_markup_documents(raw: &str) -> Vec<&str> {
    let lower = raw.to_ascii_lowercase();
    let mut docs = Vec::new();
    let mut pos = 0;
    while let Some(rel) = find_open_tag(&lower[pos..], "doc") {
        let start = pos + rel;
        let end = match lower[start..].find("</doc>") {
            Some(close) => start + close + "</doc>".len(),
            None => raw.len(),
        };
        docs.push(&raw[start..end]);
        pos = end;
    }
    if docs.is_empty() {
        docs.push(raw);
    }
    docs
}

/// Byte offset of `<name` followed by `>` or whitespace.
fn find_open_tag(lower: &str, name: &str) -> Option<usize> {
    let needle = format!("<{name}");
    let mut from = 0;
    while let Some(rel) = lower[from..].find(&needle) {
        let at = from + rel;
        match lower[at + needle.len()..].chars().next() {
            Some(c) if c == '>' || c.is_whitespace() => return Some(at),
            _ => from = at + needle.len(),
        }
    }
    None
}

/// Inner text of every `<name ...>...</name>` block.
fn blocks<'a>(raw: &'a str, lower: &str, name: &str) -> Vec<&'a str> {
    let close_tag = format!("</{name}>");
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(rel) = find_open_tag(&lower[pos..], name) {
        let open = pos + rel;
        let Some(gt) = lower[open..].find('>') else { break };
        let inner_start = open + gt + 1;
        let inner_end = lower[inner_start..].find(&close_tag).map_or(raw.len(), |c| inner_start + c);
        out.push(&raw[inner_start..inner_end]);
        pos = (inner_end + close_tag.len()).min(raw.len());
    }
    out
}

fn attribute(tag: &str, name: &str) -> Option<String> {
    let lower = tag.to_ascii_lowercase();
    let mut from = 0;
    while let Some(rel) = lower[from..].find(name) {
        let at = from + rel;
        from = at + name.len();
        let boundary = at == 0 || !lower.as_bytes()[at - 1].is_ascii_alphanumeric();
        let after = lower[from..].trim_start();
        if !boundary || !after.starts_with('=') {
            continue;
        }
        let value = tag[tag.len() - after.len() + 1..].trim_start();
        let quote = value.chars().next()?;
        return if quote == '"' || quote == '\'' {
            value[1..].find(quote).map(|end| decode_entities(&value[1..1 + end]))
        } else {
            let end = value.find(|c: char| c.is_whitespace() || c == '>').unwrap_or(value.len());
            Some(value[..end].to_string())
        };
    }
    None
}

fn parse_date_text(s: &str) -> Option<CanonicalDate> {
    let s = s.trim();
    normalize_date(s, DateFormat::YyyyMmDd)
        .or_else(|_| normalize_date(s, DateFormat::MonthName))
        .ok()
}

/// Gigaword ids carry the date: `AFP_ENG_19940512.0001`.
fn date_from_id(id: &str) -> Option<CanonicalDate> {
    id.split(|c: char| !c.is_ascii_digit())
        .filter(|run| run.len() == 8)
        .find_map(|run| normalize_date(run, DateFormat::YyyyMmDd).ok())
}

pub(super) fn parse_markup_document(raw: &str, source: &str) -> Document {
    let lower = raw.to_ascii_lowercase();
    let doc_tag = find_open_tag(&lower, "doc").map(|at| {
        let end = lower[at..].find('>').map_or(raw.len(), |gt| at + gt);
        &raw[at..end]
    });

    let id = doc_tag.and_then(|t| attribute(t, "id")).filter(|s| !s.is_empty());
    let doc_type = doc_tag.and_then(|t| attribute(t, "type")).unwrap_or_default();

    let headline = blocks(raw, &lower, "headline")
        .first()
        .map(|h| clean(h).split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|h| !h.is_empty());

    let timestamp = doc_tag
        .and_then(|t| attribute(t, "date"))
        .and_then(|d| parse_date_text(&d))
        .or_else(|| blocks(raw, &lower, "date").first().and_then(|d| parse_date_text(&clean(d))))
        .or_else(|| id.as_deref().and_then(date_from_id));

    let texts = blocks(raw, &lower, "text");
    let body = if !texts.is_empty() {
        texts.iter().map(|t| clean(t).trim().to_string()).collect::<Vec<_>>().join("\n\n")
    } else if doc_tag.is_some() {
        // DOC without TEXT: everything except the metadata blocks
        let mut stripped = raw.to_string();
        for name in ["headline", "date"] {
            for b in blocks(raw, &lower, name) {
                stripped = stripped.replacen(b, "", 1);
            }
        }
        clean(&stripped).trim().to_string()
    } else {
        clean(raw)
    };

    Document {
        id: id.unwrap_or_else(|| source.to_string()),
        doc_type,
        timestamp,
        headline,
        body,
        source_path: source.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GIGAWORD: &str = r#"<DOC id="AFP_ENG_19940512.0004" type="story" >
<HEADLINE>
Obama &amp; Co. visit Honolulu
</HEADLINE>
<DATELINE>HONOLULU, May 12 (AFP)</DATELINE>
<TEXT>
<P>
Obama was born on August 4, 1961.
</P>
</TEXT>
</DOC>
<DOC id="AFP_ENG_19940513.0001" type="advis">
<TEXT>second</TEXT>
</DOC>"#;

    #[test]
    fn entities_decoded() {
        assert_eq!(decode_entities("a &amp; b &lt;c&gt; &quot;q&quot; &apos;s &copy;"), "a & b <c> \"q\" 's &copy;");
    }

    #[test]
    fn unterminated_tag_kept() {
        assert_eq!(strip_tags("a < b"), "a < b");
        assert_eq!(strip_tags("<i>x</i> <y"), "x <y");
    }

    #[test]
    fn gigaword_blocks() {
        let docs = split_markup_documents(GIGAWORD);
        assert_eq!(docs.len(), 2);
        let d = parse_markup_document(docs[0], "f.sgml");
        assert_eq!(d.id, "AFP_ENG_19940512.0004");
        assert_eq!(d.doc_type, "story");
        assert_eq!(d.headline.as_deref(), Some("Obama & Co. visit Honolulu"));
        assert_eq!(d.body, "Obama was born on August 4, 1961.");
        assert_eq!(d.timestamp.map(|t| t.value()), Some(19940512));
        let d2 = parse_markup_document(docs[1], "f.sgml");
        assert_eq!(d2.body, "second");
        assert_eq!(d2.doc_type, "advis");
    }

    #[test]
    fn no_doc_tag_is_one_document() {
        assert_eq!(split_markup_documents("plain <b>text</b>"), vec!["plain <b>text</b>"]);
    }

    #[test]
    fn date_attribute_and_block() {
        let d = parse_markup_document(r#"<DOC id=x1 date="1961-08-04"><TEXT>t</TEXT></DOC>"#, "s");
        assert_eq!(d.id, "x1");
        assert_eq!(d.timestamp.map(|t| t.value()), Some(19610804));
        let d = parse_markup_document("<DOC id='x2'><DATE>August 4, 1961</DATE>body here</DOC>", "s");
        assert_eq!(d.timestamp.map(|t| t.value()), Some(19610804));
        assert_eq!(d.body, "body here");
    }

    #[test]
    fn attribute_requires_word_boundary() {
        assert_eq!(attribute(r#"<DOC docid="a" id="b">"#, "id").as_deref(), Some("b"));
    }
}
