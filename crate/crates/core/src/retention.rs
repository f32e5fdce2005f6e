//! Viewer behavior: turning retention curves into sampled watch durations,
//! and reconstructing empirical curves from samples.
//!
//! The retention curve is treated as the complementary CDF of watch time at
//! one-second resolution; the departure instant within the departure second
//! is uniform (inverse-CDF sampling of the piecewise-linear interpolation).
//! The sampled duration is the hidden ground truth of one viewer: algorithms
//! see the curve, never the draw.

use crate::traces::RetentionCurve;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Realized viewing time of one viewer for one video, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WatchDuration(u64);

impl WatchDuration {
    pub fn from_ms(ms: u64) -> Self {
        Self(ms)
    }

    pub fn ms(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum RetentionError {
    #[error("cannot build an empirical curve from zero samples")]
    EmptySampleSet,
}

/// Draws one watch duration from a retention curve, clamped to the video
/// duration. One uniform draw per call; deterministic in the rng stream.
pub fn sample_watch_duration<R: Rng + ?Sized>(
    curve: &RetentionCurve,
    video_duration_ms: u64,
    rng: &mut R,
) -> WatchDuration {
    assert!(video_duration_ms > 0, "video duration must be > 0");
    let u: f64 = rng.random();
    // Departure second: the first s with fraction(s) >= u > fraction(s + 1).
    // A zero draw lands in the last second that carries any mass, which for
    // well-formed curves means watching to the end.
    let mut departure = None;
    for s in 0..=curve.final_second() {
        let next = curve.fraction_at(s + 1);
        if u > next || next == 0.0 {
            departure = Some(s);
            break;
        }
    }
    let s = departure.unwrap_or_else(|| curve.final_second());
    let hi = curve.fraction_at(s);
    let lo = curve.fraction_at(s + 1);
    // Conditioned on landing in (lo, hi], u is uniform, so this offset is
    // uniform in [0, 1000).
    let within_ms = if hi > lo {
        ((((hi - u) / (hi - lo)) * 1000.0).floor() as u64).min(999)
    } else {
        999
    };
    WatchDuration((s as u64 * 1000 + within_ms).min(video_duration_ms))
}

/// Rebuilds a retention curve from sampled durations: the fraction of
/// samples at or past each integer second, cut at the first zero (which
/// doubles as the end mark).
pub fn empirical_retention(
    samples: &[WatchDuration],
    video_duration_ms: u64,
) -> Result<RetentionCurve, RetentionError> {
    if samples.is_empty() {
        return Err(RetentionError::EmptySampleSet);
    }
    debug_assert!(samples.iter().all(|d| d.ms() <= video_duration_ms));
    let n = samples.len() as f64;
    let mut fractions = Vec::new();
    for s in 0u64.. {
        let at_least = samples.iter().filter(|d| d.ms() >= s * 1000).count();
        let fraction = at_least as f64 / n;
        fractions.push(fraction);
        if fraction == 0.0 {
            break;
        }
    }
    Ok(RetentionCurve::new(fractions).expect("counting fractions satisfy curve invariants"))
}

/// Max-deviation statistics between sampled and true curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationStats {
    /// Median over repeats of the per-repeat max absolute deviation.
    pub median: f64,
    /// 90th percentile (nearest rank) of the same.
    pub p90: f64,
}

/// Repeatedly draws `n_samples` durations, rebuilds the empirical curve, and
/// measures the max absolute deviation from the true curve over their shared
/// seconds. The implied video duration is the curve's final watched second.
pub fn sampling_deviation<R: Rng + ?Sized>(
    curve: &RetentionCurve,
    n_samples: usize,
    repeats: usize,
    rng: &mut R,
) -> DeviationStats {
    assert!(n_samples >= 1 && repeats >= 1);
    let duration_ms = curve.final_second() as u64 * 1000;
    let duration_ms = duration_ms.max(1);
    let mut deviations: Vec<f64> = (0..repeats)
        .map(|_| {
            let samples: Vec<WatchDuration> = (0..n_samples)
                .map(|_| sample_watch_duration(curve, duration_ms, rng))
                .collect();
            let empirical = empirical_retention(&samples, duration_ms)
                .expect("n_samples >= 1");
            max_deviation(curve, &empirical)
        })
        .collect();
    deviations.sort_by(|a, b| a.total_cmp(b));
    DeviationStats {
        median: median_of_sorted(&deviations),
        p90: nearest_rank(&deviations, 0.9),
    }
}

/// Max |a - b| over the seconds both curves define.
pub fn max_deviation(a: &RetentionCurve, b: &RetentionCurve) -> f64 {
    let shared = a.len().min(b.len()) as u32;
    (0..shared)
        .map(|s| (a.fraction_at(s) - b.fraction_at(s)).abs())
        .fold(0.0, f64::max)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}
