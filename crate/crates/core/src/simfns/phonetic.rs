use super::SimError;
use crate::scalar::Scalar;

fn code(c: u8) -> Option<u8> {
    match c {
        b'b' | b'f' | b'p' | b'v' => Some(b'1'),
        b'c' | b'g' | b'j' | b'k' | b'q' | b's' | b'x' | b'z' => Some(b'2'),
        b'd' | b't' => Some(b'3'),
        b'l' => Some(b'4'),
        b'm' | b'n' => Some(b'5'),
        b'r' => Some(b'6'),
        // vowels and h, w, y
        _ => None,
    }
}

/// Soundex code: lowercase first letter followed by three digits.
///
/// 1. keep the first letter, drop vowels and `h`, `w`, `y` elsewhere;
/// 2. map the remaining consonants to digits;
/// 3. write two consecutive equal digits once;
/// 4. pad with `0` (or cut) to three digits.
///
/// Leading characters that are not ASCII letters are skipped, later ones are
/// ignored. The first letter is never merged with the digit that follows it.
pub fn soundex(s: &str) -> Result<String, SimError> {
    let mut letters = s.bytes().filter(u8::is_ascii_alphabetic).map(|b| b.to_ascii_lowercase());
    let first = letters.next().ok_or_else(|| SimError::Encoding(s.to_string()))?;

    let mut out = String::with_capacity(4);
    out.push(first as char);
    let mut last: Option<u8> = None;
    for digit in letters.filter_map(code) {
        if last == Some(digit) {
            continue;
        }
        last = Some(digit);
        out.push(digit as char);
        if out.len() == 4 {
            return Ok(out);
        }
    }
    while out.len() < 4 {
        out.push('0');
    }
    Ok(out)
}

/// 1 when both strings share a Soundex code, else 0. Strings without any
/// letter fall back to exact equality.
pub fn phonetic_equal<T: Scalar>(a: &str, b: &str) -> T {
    let same = match (soundex(a), soundex(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    };
    if same {
        T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        assert_eq!(soundex("daniel").unwrap(), "d540");
        assert_eq!(soundex("damiel").unwrap(), "d540");
        assert_eq!(phonetic_equal::<f64>("daniel", "damiel"), 1.0);
    }

    #[test]
    fn padding_and_truncation() {
        assert_eq!(soundex("a").unwrap(), "a000");
        assert_eq!(soundex("barack").unwrap(), "b620");
        assert_eq!(soundex("Robert").unwrap(), "r163");
        // vowels go first, so z and k end up adjacent and collapse (ANSI: t522)
        assert_eq!(soundex("Tymczak").unwrap(), "t520");
        // vowel-separated duplicates collapse once vowels are gone
        assert_eq!(soundex("Kakak").unwrap(), "k200");
    }

    #[test]
    fn no_first_letter_merge() {
        // ANSI Soundex gives p236; here the first letter stays a letter.
        assert_eq!(soundex("Pfister").unwrap(), "p123");
    }

    #[test]
    fn non_letters() {
        assert_eq!(soundex("  42 daniel").unwrap(), "d540");
        assert!(matches!(soundex("1234"), Err(SimError::Encoding(_))));
        assert!(soundex("").is_err());
        assert_eq!(phonetic_equal::<f64>("123", "123"), 1.0);
        assert_eq!(phonetic_equal::<f64>("123", "124"), 0.0);
    }

    #[test]
    fn different_names() {
        // d540 vs r163
        assert_eq!(phonetic_equal::<f64>("daniel", "robert"), 0.0);
    }

    proptest! {
        #[test]
        fn code_shape(s in "[ -~]{0,30}") {
            if let Ok(code) = soundex(&s) {
                let b = code.as_bytes();
                prop_assert_eq!(b.len(), 4);
                prop_assert!(b[0].is_ascii_lowercase());
                prop_assert!(b[1..].iter().all(u8::is_ascii_digit));
            } else {
                prop_assert!(!s.bytes().any(|c| c.is_ascii_alphabetic()));
            }
        }
    }
}
