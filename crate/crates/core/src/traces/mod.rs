//! The three dataset kinds consumed by the simulator: network throughput
//! traces, per-video chunk-size tables, and user retention curves; plus a
//! synthetic network-trace generator and the bundled sample video set.

mod network;
mod retention_curve;
mod samples;
mod synthetic;
mod video;

pub use network::{parse_network_trace, CategoryThresholds, NetworkTrace, TraceCategory};
pub use retention_curve::{parse_retention_trace, RetentionCurve};
pub use samples::{sample_manifest, sample_sequence_names};
pub use synthetic::{generate_synthetic_trace, SyntheticTraceParams};
pub use video::{load_manifest, parse_video_trace, write_manifest, Manifest, ManifestVideo, VideoAsset, LEVELS};

use thiserror::Error;

/// Errors raised while parsing, validating, or generating traces.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: timestamp not strictly increasing")]
    NonMonotonicTimestamp { line: usize },
    #[error("line {line}: throughput must be > 0")]
    NonPositiveThroughput { line: usize },
    #[error("trace has fewer than two usable points")]
    EmptyTrace,
    #[error("size files have unequal chunk counts: {counts:?}")]
    UnequalChunkCounts { counts: Vec<usize> },
    #[error("level {level}, line {line}: chunk size must be > 0")]
    NonPositiveSize { level: usize, line: usize },
    #[error("retention curve is missing the zero-fraction end mark")]
    MissingEndMark,
    #[error("line {line}: retention fraction increases")]
    IncreasingFraction { line: usize },
    #[error("line {line}: retention seconds must be consecutive integers from 0")]
    NonConsecutiveSeconds { line: usize },
    #[error("retention curve must start with (0, 1.0)")]
    BadFirstEntry,
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("invalid video asset: {0}")]
    InvalidVideo(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TraceError>;
