use std::collections::HashMap;
use std::path::Path;

use super::{Candidate, EntityType, ExtractError, MajorType, Origin};
use crate::corpus::{tokenize, Span, Token};

/// Dictionary of known entity names.
///
/// Entries are stored by their token sequence joined with single spaces, so
/// `"K. Smith"` and `"K .Smith"` are the same key. When an entry is listed
/// twice the first type wins.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<String, EntityType>,
    case_sensitive: bool,
    longest: usize,
}

/// n-grams longer than this are never looked up.
pub const MAX_NGRAM: usize = 5;

impl Gazetteer {
    pub fn new(case_sensitive: bool) -> Self {
        Self { case_sensitive, ..Self::default() }
    }

    fn key<'a>(&self, texts: impl Iterator<Item = &'a str>) -> String {
        let joined = texts.collect::<Vec<_>>().join(" ");
        if self.case_sensitive {
            joined
        } else {
            joined.to_lowercase()
        }
    }

    pub fn insert(&mut self, surface: &str, entity_type: EntityType) -> Result<(), ExtractError> {
        let tokens = tokenize(surface);
        if tokens.is_empty() {
            return Err(ExtractError::Gazetteer(format!("empty surface `{surface}`")));
        }
        if tokens.len() > MAX_NGRAM {
            return Err(ExtractError::Gazetteer(format!(
                "`{surface}` has {} tokens, at most {MAX_NGRAM} supported",
                tokens.len()
            )));
        }
        let key = self.key(tokens.iter().map(|t| t.text.as_str()));
        self.longest = self.longest.max(tokens.len());
        self.entries.entry(key).or_insert(entity_type);
        Ok(())
    }

    pub fn lookup(&self, surface: &str) -> Option<&EntityType> {
        let tokens = tokenize(surface);
        self.entries.get(&self.key(tokens.iter().map(|t| t.text.as_str())))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `surface TAB major-type [TAB subtype]` per line, `#` comments.
    pub fn parse(text: &str, case_sensitive: bool) -> Result<Self, ExtractError> {
        let mut gaz = Self::new(case_sensitive);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| ExtractError::Gazetteer(format!("line {}: {msg}", n + 1));
            let mut fields = line.split('\t');
            let surface = fields.next().unwrap_or("").trim();
            let major: MajorType = fields
                .next()
                .ok_or_else(|| bad("missing type column".into()))?
                .trim()
                .parse()
                .map_err(bad)?;
            let subtype = fields.next().unwrap_or("").trim();
            if fields.next().is_some() {
                return Err(bad("too many columns".into()));
            }
            gaz.insert(surface, EntityType::new(major, subtype)).map_err(|e| bad(e.to_string()))?;
        }
        Ok(gaz)
    }

    pub fn load(path: &Path, case_sensitive: bool) -> Result<Self, ExtractError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExtractError::Gazetteer(format!("{}: {e}", path.display())))?;
        Self::parse(&text, case_sensitive)
    }
}

/// Left-to-right scan, longest n-gram first; matches never overlap.
pub fn gazetteer_lookup(tokens: &[Token], gaz: &Gazetteer) -> Vec<Candidate> {
    let mut out = Vec::new();
    if gaz.is_empty() {
        return out;
    }
    let mut i = 0;
    while i < tokens.len() {
        let longest = gaz.longest.min(tokens.len() - i);
        let hit = (1..=longest).rev().find_map(|n| {
            let key = gaz.key(tokens[i..i + n].iter().map(|t| t.text.as_str()));
            gaz.entries.get(&key).map(|ty| (n, ty))
        });
        match hit {
            Some((n, ty)) => {
                out.push(Candidate {
                    span: Span::new(tokens[i].span.start, tokens[i + n - 1].span.end),
                    tokens: i..i + n,
                    entity_type: ty.clone(),
                    origin: Origin::Gazetteer,
                });
                i += n;
            }
            None => i += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(body: &str, gaz: &Gazetteer) -> Vec<(String, MajorType)> {
        gazetteer_lookup(&tokenize(body), gaz)
            .into_iter()
            .map(|c| (body[c.span.start..c.span.end].to_string(), c.entity_type.major))
            .collect()
    }

    #[test]
    fn direct_lookup() {
        let gaz = Gazetteer::parse("barack obama\tperson\n", false).unwrap();
        assert_eq!(surfaces("Barack Obama spoke", &gaz), vec![("Barack Obama".into(), MajorType::Person)]);
    }

    #[test]
    fn longest_match_wins() {
        let gaz = Gazetteer::parse("new york\tlocation\nnew york city\tlocation\tcity\n", false).unwrap();
        let found = gazetteer_lookup(&tokenize("New York City"), &gaz);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].span, Span::new(0, 13));
        assert_eq!(found[0].entity_type.subtype, "city");
    }

    #[test]
    fn empty_gazetteer() {
        assert!(surfaces("Barack Obama", &Gazetteer::default()).is_empty());
    }

    #[test]
    fn case_sensitivity() {
        let gaz = Gazetteer::parse("Apple\torganization\n", true).unwrap();
        assert!(surfaces("an apple a day", &gaz).is_empty());
        assert_eq!(surfaces("Apple shares", &gaz).len(), 1);
    }

    #[test]
    fn punctuation_inside_entries() {
        let gaz = Gazetteer::parse("K. Despath\tperson\tpolitician\n", false).unwrap();
        assert_eq!(surfaces("said K. Despath today", &gaz), vec![("K. Despath".into(), MajorType::Person)]);
    }

    #[test]
    fn adjacent_matches_do_not_overlap() {
        let gaz = Gazetteer::parse("a b\tperson\nb c\tlocation\nc\tlocation\n", false).unwrap();
        let s = surfaces("a b c", &gaz);
        assert_eq!(s, vec![("a b".into(), MajorType::Person), ("c".into(), MajorType::Location)]);
    }

    #[test]
    fn parse_errors() {
        assert!(Gazetteer::parse("x\tplanet\n", false).is_err());
        assert!(Gazetteer::parse("x\n", false).is_err());
        assert!(Gazetteer::parse("\tperson\n", false).is_err());
        assert!(Gazetteer::parse("a b c d e f\tperson\n", false).is_err());
        let g = Gazetteer::parse("# comment\n\nx\tperson\n", false).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.lookup("X").unwrap().major, MajorType::Person);
    }

    #[test]
    fn first_entry_wins() {
        let g = Gazetteer::parse("Washington\tperson\nWashington\tlocation\n", false).unwrap();
        assert_eq!(g.lookup("washington").unwrap().major, MajorType::Person);
    }
}
