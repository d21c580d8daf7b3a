use serde::{Deserialize, Serialize};

/// Half-open byte interval `[start, end)` into a document body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub span: Span,
    pub kind: TokenKind,
}

impl Token {
    /// First character is uppercase.
    pub fn is_capitalized(&self) -> bool {
        self.kind == TokenKind::Word && self.text.chars().next().is_some_and(char::is_uppercase)
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punctuation && self.text.starts_with(c)
    }

    /// Byte-adjacent to `next` (no whitespace in between).
    pub fn touches(&self, next: &Token) -> bool {
        self.span.end == next.span.start
    }
}

/// Split `body` into word, number and punctuation tokens.
///
/// Maximal runs of alphanumeric characters become one token (`Number` when
/// the run is all digits, `Word` otherwise). Every other non-whitespace
/// character is a single punctuation token. Whitespace is dropped.
pub fn tokenize(body: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<(usize, bool)> = None; // (start, all digits so far)

    let close = |tokens: &mut Vec<Token>, start: usize, end: usize, digits: bool| {
        tokens.push(Token {
            text: body[start..end].to_string(),
            span: Span::new(start, end),
            kind: if digits { TokenKind::Number } else { TokenKind::Word },
        });
    };

    for (i, c) in body.char_indices() {
        if c.is_alphanumeric() {
            run = match run {
                Some((start, digits)) => Some((start, digits && c.is_numeric())),
                None => Some((i, c.is_numeric())),
            };
            continue;
        }
        if let Some((start, digits)) = run.take() {
            close(&mut tokens, start, i, digits);
        }
        if !c.is_whitespace() {
            let end = i + c.len_utf8();
            tokens.push(Token {
                text: body[i..end].to_string(),
                span: Span::new(i, end),
                kind: TokenKind::Punctuation,
            });
        }
    }
    if let Some((start, digits)) = run {
        close(&mut tokens, start, body.len(), digits);
    }
    tokens
}
