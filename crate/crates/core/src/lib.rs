//! Chunk-level discrete-event simulator for multi-video prefetching in
//! short-video streaming.
//!
//! A session plays a sequence of short videos under a recorded (or synthetic)
//! network trace. The viewer abandons each video at a hidden watch duration
//! sampled from its retention curve and swipes to the next one; a prefetch
//! algorithm decides, step by step, which video in the upcoming window to
//! download a chunk from, at which bitrate, or whether to pause downloading.
//! Sessions are scored by a QoE-minus-bandwidth utility and compared over an
//! evaluation grid of (network, video sequence, sampled viewer) conditions.
//!
//! Crate layout:
//!
//! - [`traces`] — network/video/retention trace parsing, synthetic trace
//!   generation, bandwidth integration queries.
//! - [`retention`] — watch-duration sampling and empirical retention curves.
//! - [`engine`] — the millisecond-resolution playback/download core.
//! - [`scoring`] — per-video utility and session score from engine ledgers.
//! - [`algorithms`] — the decision interface, bandwidth estimators, and
//!   baseline policies.
//! - [`harness`] — grid construction, parallel evaluation, score
//!   normalization, and ranking.

pub mod algorithms;
pub mod engine;
pub mod harness;
pub mod retention;
pub mod scoring;
pub mod traces;

pub use algorithms::{Algorithm, AlgorithmContext, AlgorithmRegistry};
pub use engine::{Decision, Level, Observation, Session, SessionConfig, Trajectory};
pub use harness::{Condition, ConditionResult, EvalReport, RankingReport};
pub use retention::WatchDuration;
pub use scoring::{QoeBreakdown, QoeCoefficients, WasteReport};
pub use traces::{
    CategoryThresholds, NetworkTrace, RetentionCurve, SyntheticTraceParams, TraceCategory,
    VideoAsset,
};
