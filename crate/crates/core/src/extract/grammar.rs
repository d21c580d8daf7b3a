use super::{Candidate, EntityType, MajorType, Origin};
use crate::corpus::{Span, Token, TokenKind};
use crate::simfns::{month_from_name, normalize_date, CanonicalDate, DateFormat};

pub const PERSON_TITLES: [&str; 5] = ["Mr", "Mrs", "Dr", "President", "Senator"];
pub const ORGANIZATION_DESIGNATORS: [&str; 3] = ["Inc", "Corp", "Ltd"];

const WEEKDAYS: [&str; 7] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];
const CURRENCY: [&str; 4] = ["$", "£", "€", "¥"];

struct Stream<'a> {
    tokens: &'a [Token],
}

impl<'a> Stream<'a> {
    fn get(&self, i: usize) -> Option<&'a Token> {
        self.tokens.get(i)
    }

    fn text(&self, i: usize) -> &'a str {
        self.get(i).map_or("", |t| t.text.as_str())
    }

    fn number(&self, i: usize, digits: std::ops::RangeInclusive<usize>) -> Option<u32> {
        let t = self.get(i)?;
        if t.kind != TokenKind::Number || !digits.contains(&t.text.len()) || !t.text.is_ascii() {
            return None;
        }
        t.text.parse().ok()
    }

    /// Token `i` exists and starts exactly where token `i - 1` ends.
    fn glued(&self, i: usize) -> bool {
        i > 0 && matches!((self.get(i - 1), self.get(i)), (Some(a), Some(b)) if a.touches(b))
    }

    fn glued_punct(&self, i: usize, c: &str) -> bool {
        self.glued(i) && self.text(i) == c
    }

    fn is_title(&self, i: usize) -> bool {
        PERSON_TITLES.contains(&self.text(i))
    }

    fn is_initial(&self, i: usize) -> bool {
        let t = self.text(i);
        t.chars().count() == 1 && t.chars().all(char::is_uppercase)
    }

    fn is_capitalized_word(&self, i: usize) -> bool {
        let Some(t) = self.get(i) else { return false };
        t.kind == TokenKind::Word
            && t.is_capitalized()
            && month_from_name(&t.text).is_none()
            && !WEEKDAYS.contains(&t.text.as_str())
    }

    /// First token, or right after `.`, `!`, `?`, except a `.` closing an
    /// initial or a title.
    fn sentence_initial(&self, i: usize) -> bool {
        if i == 0 {
            return true;
        }
        match self.text(i - 1) {
            "!" | "?" => true,
            "." => !(i >= 2 && self.glued(i - 1) && (self.is_initial(i - 2) || self.is_title(i - 2))),
            _ => false,
        }
    }
}

type Match = (usize, MajorType);

fn month_date(s: &Stream, i: usize) -> Option<Match> {
    let t = s.get(i)?;
    if t.kind != TokenKind::Word || !t.is_capitalized() {
        return None;
    }
    let month = month_from_name(&t.text)?;
    let mut j = i + 1;
    if t.text.len() <= 4 && s.glued_punct(j, ".") {
        j += 1;
    }
    let day = s.number(j, 1..=2)?;
    let mut end = j + 1;
    let mut year = None;
    if s.text(end) == "," {
        if let Some(y) = s.number(end + 1, 4..=4) {
            year = Some(y);
            end += 2;
        }
    } else if let Some(y) = s.number(end, 4..=4) {
        year = Some(y);
        end += 1;
    }
    CanonicalDate::from_ymd(year.unwrap_or(2000) as i32, month, day)?;
    Some((end, MajorType::Date))
}

fn numeric_date(s: &Stream, i: usize) -> Option<Match> {
    let (sep, widths, format) = if s.number(i, 4..=4).is_some() {
        ("-", [4usize, 2, 2], DateFormat::YyyyMmDd)
    } else {
        ("/", [2, 2, 4], DateFormat::DdMmYyyy)
    };
    let mut parts = Vec::with_capacity(3);
    for (k, width) in widths.into_iter().enumerate() {
        let at = i + 2 * k;
        if k > 0 && !(s.glued_punct(at - 1, sep) && s.glued(at)) {
            return None;
        }
        let lo = if width == 4 { 4 } else { 1 };
        s.number(at, lo..=width)?;
        parts.push(s.text(at));
    }
    normalize_date(&parts.join(sep), format).ok()?;
    Some((i + 5, MajorType::Date))
}

fn time(s: &Stream, i: usize) -> Option<Match> {
    let h = s.number(i, 1..=2)?;
    if h > 23 || !s.glued_punct(i + 1, ":") || !s.glued(i + 2) || s.number(i + 2, 2..=2)? > 59 {
        return None;
    }
    let mut end = i + 3;
    if s.glued_punct(end, ":") && s.glued(end + 1) && s.number(end + 1, 2..=2).is_some_and(|sec| sec <= 59) {
        end += 2;
    }
    Some((end, MajorType::Time))
}

fn money(s: &Stream, i: usize) -> Option<Match> {
    if !CURRENCY.contains(&s.text(i)) || !s.glued(i + 1) {
        return None;
    }
    s.number(i + 1, 1..=usize::MAX)?;
    let mut end = i + 2;
    while s.glued_punct(end, ",") && s.glued(end + 1) && s.number(end + 1, 3..=3).is_some() {
        end += 2;
    }
    if s.glued_punct(end, ".") && s.glued(end + 1) && s.number(end + 1, 1..=usize::MAX).is_some() {
        end += 2;
    }
    Some((end, MajorType::Money))
}

fn percent(s: &Stream, i: usize) -> Option<Match> {
    s.number(i, 1..=usize::MAX)?;
    let mut end = i + 1;
    if s.glued_punct(end, ".") && s.glued(end + 1) && s.number(end + 1, 1..=usize::MAX).is_some() {
        end += 2;
    }
    s.glued_punct(end, "%").then_some((end + 1, MajorType::Percent))
}

fn capitalized_run(s: &Stream, i: usize, default: MajorType) -> Option<Match> {
    if !s.is_capitalized_word(i) || (s.sentence_initial(i) && !s.is_title(i)) {
        return None;
    }
    let mut end = i + 1;
    loop {
        if s.is_capitalized_word(end) {
            end += 1;
        } else if s.glued_punct(end, ".")
            && (s.is_initial(end - 1) || s.is_title(end - 1))
            && s.is_capitalized_word(end + 1)
        {
            end += 2;
        } else {
            break;
        }
    }
    let words: Vec<&str> = (i..end).map(|k| s.text(k)).filter(|w| w != &".").collect();
    if !words.iter().any(|w| w.chars().count() >= 2) {
        return None;
    }
    let ty = if s.is_title(i) {
        if words.len() == 1 {
            return None;
        }
        MajorType::Person
    } else if ORGANIZATION_DESIGNATORS.contains(words.last()?) {
        MajorType::Organization
    } else {
        default
    };
    Some((end, ty))
}

/// Built-in rules over the token stream. Spans never overlap each other.
///
/// Temporal and numeric rules are tried before the capitalization heuristic.
/// Grammar mentions never carry a subtype.
pub fn apply_grammar(tokens: &[Token], default_type: MajorType) -> Vec<Candidate> {
    let s = Stream { tokens };
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let hit = month_date(&s, i)
            .or_else(|| numeric_date(&s, i))
            .or_else(|| time(&s, i))
            .or_else(|| money(&s, i))
            .or_else(|| percent(&s, i))
            .or_else(|| capitalized_run(&s, i, default_type));
        match hit {
            Some((end, major)) => {
                out.push(Candidate {
                    span: Span::new(tokens[i].span.start, tokens[end - 1].span.end),
                    tokens: i..end,
                    entity_type: EntityType::major(major),
                    origin: Origin::Grammar,
                });
                i = end;
            }
            None => i += 1,
        }
    }
    out
}
