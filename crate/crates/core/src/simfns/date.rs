//! Date normalization and date similarity.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::scalar::Scalar;

/// A calendar date in canonical `yyyymmdd` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct CanonicalDate(u32);

impl CanonicalDate {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        let date = NaiveDate::from_ymd_opt(year, month, day)?;
        if !(0..=9999).contains(&date.year()) {
            return None;
        }
        Some(Self(date.year() as u32 * 10_000 + month * 100 + day))
    }

    /// Canonical `yyyymmdd` integer.
    pub fn value(self) -> u32 {
        self.0
    }

    fn naive(self) -> NaiveDate {
        NaiveDate::from_ymd_opt((self.0 / 10_000) as i32, (self.0 / 100) % 100, self.0 % 100)
            .expect("canonical dates are valid by construction")
    }

    /// Absolute number of days between two dates.
    pub fn days_between(self, other: Self) -> u64 {
        (self.naive() - other.naive()).num_days().unsigned_abs()
    }

    /// Accepts `yyyymmdd` or `yyyy-mm-dd`.
    pub fn parse_iso(s: &str) -> Result<Self, SimError> {
        normalize_date(s, DateFormat::YyyyMmDd)
    }
}

impl TryFrom<u32> for CanonicalDate {
    type Error = SimError;

    fn try_from(v: u32) -> Result<Self, SimError> {
        Self::from_ymd((v / 10_000) as i32, (v / 100) % 100, v % 100)
            .ok_or_else(|| SimError::Date(v.to_string()))
    }
}

impl From<CanonicalDate> for u32 {
    fn from(d: CanonicalDate) -> u32 {
        d.0
    }
}

impl fmt::Display for CanonicalDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}", self.0)
    }
}

/// Input layouts understood by [`normalize_date`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DateFormat {
    DdMmYyyy,
    MmDdYyyy,
    YyyyMmDd,
    /// `August 4, 1961`, `Aug. 4 1961` or `4 August 1961`.
    MonthName,
}

impl FromStr for DateFormat {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ddmmyyyy" => Ok(Self::DdMmYyyy),
            "mmddyyyy" => Ok(Self::MmDdYyyy),
            "yyyymmdd" => Ok(Self::YyyyMmDd),
            "monthname" => Ok(Self::MonthName),
            _ => Err(SimError::Config(format!("unknown date format `{s}`"))),
        }
    }
}

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december",
];

/// Month number for a full or three-letter English month name.
pub fn month_from_name(name: &str) -> Option<u32> {
    let lower = name.to_lowercase();
    if lower == "sept" {
        return Some(9);
    }
    MONTHS.iter().position(|m| *m == lower || (lower.len() == 3 && m.starts_with(&lower))).map(|i| i as u32 + 1)
}

fn is_separator(c: char) -> bool {
    matches!(c, '-' | '/' | ':' | '.' | ' ')
}

/// Convert a date string to canonical `yyyymmdd`.
///
/// Separator characters (`-`, `/`, `:`, `.`, space) are removed; without
/// separators the fields are read at fixed widths.
pub fn normalize_date(s: &str, format: DateFormat) -> Result<CanonicalDate, SimError> {
    let err = || SimError::Date(s.to_string());
    let trimmed = s.trim();

    let (year, month, day): (&str, &str, &str) = match format {
        DateFormat::MonthName => return parse_month_name(trimmed).ok_or_else(err),
        numeric => {
            let fields: Vec<&str> = trimmed.split(is_separator).filter(|f| !f.is_empty()).collect();
            let fields: [&str; 3] = match fields.len() {
                3 => [fields[0], fields[1], fields[2]],
                1 => {
                    let f = fields[0];
                    if f.len() != 8 || !f.is_ascii() {
                        return Err(err());
                    }
                    match numeric {
                        DateFormat::YyyyMmDd => [&f[..4], &f[4..6], &f[6..]],
                        _ => [&f[..2], &f[2..4], &f[4..]],
                    }
                }
                _ => return Err(err()),
            };
            match numeric {
                DateFormat::DdMmYyyy => (fields[2], fields[1], fields[0]),
                DateFormat::MmDdYyyy => (fields[2], fields[0], fields[1]),
                _ => (fields[0], fields[1], fields[2]),
            }
        }
    };

    if year.len() != 4 || month.len() > 2 || day.len() > 2 {
        return Err(err());
    }
    let num = |f: &str| -> Result<u32, SimError> {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        f.parse().map_err(|_| err())
    };
    CanonicalDate::from_ymd(num(year)? as i32, num(month)?, num(day)?).ok_or_else(err)
}

fn parse_month_name(s: &str) -> Option<CanonicalDate> {
    let parts: Vec<&str> = s
        .split(|c: char| !c.is_alphanumeric())
        .filter(|p| !p.is_empty())
        .collect();
    if parts.len() != 3 {
        return None;
    }
    let (month, day, year) = if let Some(m) = month_from_name(parts[0]) {
        (m, parts[1], parts[2])
    } else {
        (month_from_name(parts[1])?, parts[0], parts[2])
    };
    if year.len() != 4 || day.len() > 2 {
        return None;
    }
    let day: u32 = day.parse().ok()?;
    let year: i32 = year.parse().ok()?;
    CanonicalDate::from_ymd(year, month, day)
}

/// `1 / (1 + |days between|)`.
pub fn date_similarity<T: Scalar>(a: CanonicalDate, b: CanonicalDate) -> T {
    T::one() / (T::one() + T::from_u64(a.days_between(b)).expect("day count fits"))
}
