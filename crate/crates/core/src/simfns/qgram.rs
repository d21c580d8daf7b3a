use std::cmp::Ordering;
use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Which q-gram count normalizes the number of common q-grams.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QGramDenominator {
    Minimum,
    Average,
    #[default]
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QGramConfig {
    pub q: NonZeroUsize,
    #[serde(default)]
    pub denominator: QGramDenominator,
}

impl Default for QGramConfig {
    fn default() -> Self {
        Self { q: NonZeroUsize::new(2).unwrap(), denominator: QGramDenominator::Maximum }
    }
}

impl QGramConfig {
    pub fn new(q: usize, denominator: QGramDenominator) -> Option<Self> {
        Some(Self { q: NonZeroUsize::new(q)?, denominator })
    }
}

/// Char boundaries of the q-gram windows, unpadded. Strings shorter than `q`
/// yield nothing.
fn gram_slices(s: &str, q: usize) -> Vec<&str> {
    let bounds: Vec<usize> = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len())).collect();
    let chars = bounds.len() - 1;
    if chars < q {
        return Vec::new();
    }
    (0..=chars - q).map(|i| &s[bounds[i]..bounds[i + q]]).collect()
}

/// The q-grams of `s` in order of occurrence (a multiset, repeats kept).
pub fn qgrams(s: &str, q: usize) -> Vec<String> {
    assert!(q >= 1, "q must be positive");
    gram_slices(s, q).into_iter().map(str::to_string).collect()
}

/// Number of common q-grams (multiset intersection) divided by the
/// minimum, average or maximum q-gram count of the two strings.
pub fn qgram_similarity<T: Scalar>(a: &str, b: &str, cfg: QGramConfig) -> T {
    let q = cfg.q.get();
    let mut ga = gram_slices(a, q);
    let mut gb = gram_slices(b, q);
    match (ga.is_empty(), gb.is_empty()) {
        (true, true) => return T::one(),
        (true, false) | (false, true) => return T::zero(),
        _ => {}
    }
    ga.sort_unstable();
    gb.sort_unstable();

    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < ga.len() && j < gb.len() {
        match ga[i].cmp(gb[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }

    let (na, nb) = (ga.len(), gb.len());
    let common = T::from_count(common);
    match cfg.denominator {
        QGramDenominator::Minimum => common / T::from_count(na.min(nb)),
        QGramDenominator::Maximum => common / T::from_count(na.max(nb)),
        QGramDenominator::Average => T::lit(2.0) * common / T::from_count(na + nb),
    }
}
