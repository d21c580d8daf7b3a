use std::collections::HashMap;
use std::path::Path;

use super::SimError;
use crate::scalar::Scalar;

/// User-defined symmetric similarity between categorical values.
///
/// Equal values always score 1, unlisted pairs score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryTable {
    scores: HashMap<(String, String), f64>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CategoryTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set the score for `(a, b)` and `(b, a)`.
    pub fn insert(&mut self, a: &str, b: &str, score: f64) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(SimError::Config(format!("score {score} for ({a}, {b}) outside [0, 1]")));
        }
        if a == b && score != 1.0 {
            return Err(SimError::Config(format!("diagonal score for `{a}` must be 1, got {score}")));
        }
        match self.scores.insert(ordered(a, b), score) {
            Some(prev) if prev != score => {
                Err(SimError::Config(format!("conflicting scores {prev} and {score} for ({a}, {b})")))
            }
            _ => Ok(()),
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        if a == b {
            return Some(1.0);
        }
        self.scores.get(&ordered(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Parse TAB-separated `value1 TAB value2 TAB score` lines; `#` starts a
    /// comment line.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut table = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |msg: &str| SimError::Config(format!("line {}: {msg}", n + 1));
            if fields.len() != 3 {
                return Err(bad("expected value1<TAB>value2<TAB>score"));
            }
            let score: f64 = fields[2].trim().parse().map_err(|_| bad("score is not a number"))?;
            table.insert(fields[0].trim(), fields[1].trim(), score).map_err(|e| bad(&e.to_string()))?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Table lookup; equal categories score 1, unlisted pairs 0.
pub fn categorical_similarity<T: Scalar>(a: &str, b: &str, table: &CategoryTable) -> T {
    T::lit(table.get(a, b).unwrap_or(0.0))
}

/// Known aliases ("Richard" / "Dick"), matched case-insensitively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AliasTable {
    inner: CategoryTable,
}

impl AliasTable {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let raw = CategoryTable::parse(text)?;
        let mut inner = CategoryTable::new();
        for ((a, b), s) in raw.scores {
            inner.insert(&a.to_lowercase(), &b.to_lowercase(), s)?;
        }
        Ok(Self { inner })
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, a: &str, b: &str, score: f64) -> Result<(), SimError> {
        self.inner.insert(&a.to_lowercase(), &b.to_lowercase(), score)
    }

    /// Alias score for two distinct values, if listed.
    pub fn lookup(&self, a: &str, b: &str) -> Option<f64> {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        if a == b {
            return None;
        }
        self.inner.get(&a, &b)
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }
}
