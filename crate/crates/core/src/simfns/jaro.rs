use super::SimError;
use crate::scalar::Scalar;

pub const DEFAULT_PREFIX_SCALE: f64 = 0.1;

/// Jaro similarity.
///
/// Characters match when equal and at most `max(|a|, |b|) / 2 - 1`
/// positions apart; each character matches at most once, scanning left to
/// right. Transpositions are matched characters that differ when both
/// matched sequences are read in order, halved.
pub fn jaro<T: Scalar>(a: &str, b: &str) -> T {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

fn jaro_chars<T: Scalar>(a: &[char], b: &[char]) -> T {
    if a.is_empty() && b.is_empty() {
        return T::one();
    }
    if a.is_empty() || b.is_empty() {
        return T::zero();
    }

    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_hit = vec![false; a.len()];
    let mut b_hit = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_hit[j] && b[j] == *ca {
                a_hit[i] = true;
                b_hit[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return T::zero();
    }

    let a_seq = a.iter().zip(&a_hit).filter(|(_, h)| **h).map(|(c, _)| c);
    let b_seq = b.iter().zip(&b_hit).filter(|(_, h)| **h).map(|(c, _)| c);
    let half_transpositions = a_seq.zip(b_seq).filter(|(x, y)| x != y).count();

    let m = T::from_count(matches);
    let t = T::from_count(half_transpositions) / T::lit(2.0);
    (m / T::from_count(a.len()) + m / T::from_count(b.len()) + (m - t) / m) / T::lit(3.0)
}

/// Jaro-Winkler: `jaro + l * p * (1 - jaro)` with `l` the common prefix length
/// capped at 4 and `p` the prefix scale in `[0, 0.25]`.
pub fn jaro_winkler<T: Scalar>(a: &str, b: &str, prefix_scale: T) -> Result<T, SimError> {
    if !(prefix_scale >= T::zero() && prefix_scale <= T::lit(0.25)) {
        return Err(SimError::Config(format!("prefix scale {prefix_scale} outside [0, 0.25]")));
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let j: T = jaro_chars(&a, &b);
    let prefix = a.iter().zip(&b).take(4).take_while(|(x, y)| x == y).count();
    Ok((j + T::from_count(prefix) * prefix_scale * (T::one() - j)).unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn martha() {
        // m = 6, one swapped pair (T/H) gives t = 1:
        // (6/6 + 6/6 + 5/6) / 3 = 0.94444...
        let j: f64 = jaro("MARTHA", "MARHTA");
        assert!((j - 17.0 / 18.0).abs() < 1e-12);
        // prefix "MAR": 17/18 + 3 * 0.1 * (1/18)
        let jw = jaro_winkler("MARTHA", "MARHTA", 0.1f64).unwrap();
        assert!((jw - (17.0 / 18.0 + 0.3 / 18.0)).abs() < 1e-12);
        assert!((jw - 0.9611).abs() < 1e-4);
    }

    #[test]
    fn textbook_values() {
        assert!((jaro::<f64>("DIXON", "DICKSONX") - 0.7667).abs() < 1e-4);
        assert!((jaro_winkler("DIXON", "DICKSONX", 0.1f64).unwrap() - 0.8133).abs() < 1e-4);
        assert!((jaro::<f64>("DWAYNE", "DUANE") - 0.8222).abs() < 1e-4);
    }

    #[test]
    fn identity_and_disjoint() {
        assert_eq!(jaro::<f64>("abc", "abc"), 1.0);
        assert_eq!(jaro::<f64>("abc", "xyz"), 0.0);
        assert_eq!(jaro::<f64>("", ""), 1.0);
        assert_eq!(jaro::<f64>("", "a"), 0.0);
        assert_eq!(jaro_winkler("same", "same", 0.25f32).unwrap(), 1.0);
    }

    #[test]
    fn no_common_prefix_equals_jaro() {
        let j: f64 = jaro("xabcd", "yabcd");
        assert_eq!(jaro_winkler("xabcd", "yabcd", 0.1).unwrap(), j);
    }

    #[test]
    fn prefix_scale_range_checked() {
        assert!(jaro_winkler("a", "b", 0.3f64).is_err());
        assert!(jaro_winkler("a", "b", -0.01f64).is_err());
        assert!(jaro_winkler("a", "b", f64::NAN).is_err());
        assert!(jaro_winkler("a", "b", 0.25f64).is_ok());
    }
}
