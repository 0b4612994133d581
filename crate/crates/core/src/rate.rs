//! Fixed-point percentages rounded half-up to one decimal.

use std::fmt;

use serde::{Serialize, Serializer};

/// A percentage stored in tenths of a percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(u64);

impl Percent {
    /// `num/den` as a percentage, half-up to one decimal. `None` when `den == 0`.
    pub fn of(num: u64, den: u64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        // round(1000 * num / den) with ties away from zero, in integers
        Some(Percent((2000 * num + den) / (2 * den)))
    }

    pub fn tenths(self) -> u64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 10.0
    }

    /// `40.2` (no percent sign).
    pub fn number(self) -> String {
        format!("{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}%", self.number())
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// `40.2%`, or `n/a` for an empty denominator.
pub fn render(p: Option<Percent>) -> String {
    p.map_or_else(|| "n/a".to_string(), |p| p.to_string())
}
