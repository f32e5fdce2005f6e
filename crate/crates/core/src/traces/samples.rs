//! The bundled seven-video sample set.
//!
//! Lengths match the published example videos (17, 26, 37, 40, 47, 6, and
//! 125 seconds). Chunk sizes are synthetic: drawn around each ladder rate so
//! the mean chunk size matches the nominal bitrate, with a deterministic
//! internal seed. Retention curves decay exponentially at per-video rates.

use super::retention_curve::RetentionCurve;
use super::video::{VideoAsset, DEFAULT_LADDER_KBPS, LEVELS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// `(name, length in seconds, retention decay per second)`.
const SAMPLE_VIDEOS: [(&str, u32, f64); 7] = [
    ("tj", 17, 0.060),
    ("EDG", 26, 0.045),
    ("gy", 37, 0.055),
    ("dx", 40, 0.050),
    ("ss", 47, 0.065),
    ("jt", 6, 0.080),
    ("yd", 125, 0.035),
];

const SAMPLE_SEED: u64 = 0x5653_494d;

/// Names of the bundled videos, in playback order.
pub fn sample_sequence_names() -> Vec<&'static str> {
    SAMPLE_VIDEOS.iter().map(|(name, _, _)| *name).collect()
}

/// Builds the bundled seven-video set. Deterministic across calls.
pub fn sample_manifest() -> Vec<Arc<VideoAsset>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    SAMPLE_VIDEOS
        .iter()
        .map(|&(name, length_s, decay)| {
            let sizes = (0..length_s)
                .map(|_| {
                    let jitter: f64 = rng.random_range(0.8..1.2);
                    let mut row = [0u64; LEVELS];
                    for (level, out) in row.iter_mut().enumerate() {
                        // kbps * 125 = bytes per second of playback.
                        let nominal = DEFAULT_LADDER_KBPS[level] as f64 * 125.0;
                        *out = (nominal * jitter).round().max(1.0) as u64;
                    }
                    row
                })
                .collect();
            let retention = decay_curve(length_s, decay);
            Arc::new(
                VideoAsset::new(name, sizes, DEFAULT_LADDER_KBPS, retention)
                    .expect("sample video construction cannot fail"),
            )
        })
        .collect()
}

/// Exponential-decay retention over `0..=length_s`, with the end mark one
/// second past the final watched second.
fn decay_curve(length_s: u32, decay: f64) -> RetentionCurve {
    let mut fractions: Vec<f64> = (0..=length_s)
        .map(|s| {
            // Keep serialized fractions short and exactly round-trippable.
            let f = (-decay * s as f64).exp();
            (f * 10_000.0).round() / 10_000.0
        })
        .collect();
    fractions[0] = 1.0;
    fractions.push(0.0);
    RetentionCurve::new(fractions).expect("decay curve is monotone by construction")
}
