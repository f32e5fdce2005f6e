//! Per-video user retention curves.
//!
//! A curve is the complementary CDF of watch time at one-second resolution:
//! entry `(s, f)` means a fraction `f` of viewers are still watching at
//! second `s`. The first entry is always `(0, 1.0)` and the final entry is a
//! zero-fraction end mark one second past the last watched second.

use super::{Result, TraceError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionCurve {
    /// Fraction still watching at second `i`; seconds are the indices.
    fractions: Vec<f64>,
}

impl RetentionCurve {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.len() < 2 {
            return Err(TraceError::MissingEndMark);
        }
        if fractions[0] != 1.0 {
            return Err(TraceError::BadFirstEntry);
        }
        for (i, w) in fractions.windows(2).enumerate() {
            if !w[1].is_finite() || w[1] < 0.0 || w[1] > 1.0 {
                return Err(TraceError::MalformedLine {
                    line: i + 2,
                    reason: "fraction outside [0, 1]".into(),
                });
            }
            if w[1] > w[0] {
                return Err(TraceError::IncreasingFraction { line: i + 2 });
            }
        }
        if *fractions.last().unwrap() != 0.0 {
            return Err(TraceError::MissingEndMark);
        }
        Ok(Self { fractions })
    }

    /// Number of entries, end mark included.
    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Second of the zero-fraction end mark.
    pub fn end_mark_second(&self) -> u32 {
        (self.fractions.len() - 1) as u32
    }

    /// The last second with a (possibly) nonzero fraction; viewers reaching
    /// it watched the whole video.
    pub fn final_second(&self) -> u32 {
        self.end_mark_second() - 1
    }

    /// Fraction still watching at integer second `s` (0 past the end mark).
    pub fn fraction_at(&self, s: u32) -> f64 {
        self.fractions.get(s as usize).copied().unwrap_or(0.0)
    }

    /// Fraction in effect at a millisecond offset (stepwise per second).
    pub fn fraction_at_ms(&self, ms: u64) -> f64 {
        self.fraction_at((ms / 1000).min(u32::MAX as u64) as u32)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.fractions.iter().enumerate().map(|(s, &f)| (s as u32, f))
    }

    /// One `<second> <fraction>` record per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (s, f) in self.entries() {
            out.push_str(&format!("{} {}\n", s, f));
        }
        out
    }
}

/// Parses the `<second> <fraction>` text format.
pub fn parse_retention_trace(text: &str) -> Result<RetentionCurve> {
    let mut fractions = Vec::new();
    let mut next_second: u64 = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut fields = raw.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            if raw.trim().is_empty() {
                continue;
            }
            return Err(TraceError::MalformedLine {
                line,
                reason: "expected two fields".into(),
            });
        };
        if fields.next().is_some() {
            return Err(TraceError::MalformedLine {
                line,
                reason: "expected exactly two fields".into(),
            });
        }
        let second: u64 = a.parse().map_err(|_| TraceError::MalformedLine {
            line,
            reason: format!("bad second {a:?}"),
        })?;
        let fraction: f64 = b.parse().map_err(|_| TraceError::MalformedLine {
            line,
            reason: format!("bad fraction {b:?}"),
        })?;
        if second != next_second {
            return Err(TraceError::NonConsecutiveSeconds { line });
        }
        next_second += 1;
        fractions.push(fraction);
    }
    if fractions.is_empty() {
        return Err(TraceError::MissingEndMark);
    }
    RetentionCurve::new(fractions)
}
