//! The discrete-event core: a sliding window of players over a video
//! sequence, millisecond-resolution Download/Sleep steps, swipe handling,
//! and rebuffer/bandwidth accounting.

mod export;
mod session;
mod trajectory;

pub use export::{read_trajectory, write_trajectory, TrajectoryMeta};
pub use session::{run_session, RunError, Session, SessionConfig};
pub use trajectory::{DecisionRecord, DownloadRecord, PlaybackRecord, StepRecord, Trajectory};

use crate::traces::{RetentionCurve, LEVELS};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Maximum number of videos visible to the algorithm, the playing one
/// included.
pub const WINDOW_SIZE: usize = 5;

/// One rung of the bitrate ladder (0 = lowest of the three).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Level(u8);

impl Level {
    pub const LOW: Level = Level(0);
    pub const MID: Level = Level(1);
    pub const TOP: Level = Level(2);

    pub fn new(index: usize) -> Option<Self> {
        (index < LEVELS).then_some(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// What the algorithm asks the simulator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Decision {
    /// Download the next chunk of the window video at `slot`, at `level`.
    Download { slot: usize, level: Level },
    /// Pause downloading for a strictly positive number of milliseconds
    /// while playback continues.
    Sleep { ms: u64 },
}

/// Per-slot view of one window video. Watch durations are hidden ground
/// truth and never appear here.
#[derive(Debug, Clone, Serialize)]
pub struct PlayerSnapshot {
    /// Position of the video in the session sequence.
    pub video_id: usize,
    pub name: String,
    pub chunk_count: usize,
    pub downloaded_chunks: usize,
    /// Downloaded-but-unplayed duration.
    pub buffer_ms: u64,
    /// Sizes of the next (in-order) chunk at every ladder level, in bits;
    /// `None` once the video is fully downloaded.
    pub next_chunk_bits: Option<[u64; LEVELS]>,
    pub chunk_duration_ms: u64,
    pub total_duration_ms: u64,
    pub ladder_kbps: [u32; LEVELS],
    #[serde(skip)]
    pub retention: Arc<RetentionCurve>,
}

/// What the simulator reports after each step (and once before the first).
#[derive(Debug, Clone, Serialize)]
pub struct Observation {
    /// Wall time of the last pause or chunk download, in ms.
    pub delay_ms: u64,
    /// Rebuffering accrued during that time, in ms.
    pub rebuf_ms: u64,
    /// Size of the last downloaded chunk, in bits (0 after a sleep).
    pub video_size_bits: u64,
    /// Whether the last download completed its video.
    pub end_of_video: bool,
    /// Sequence id of the currently playing video.
    pub play_video_id: usize,
    /// The window, slot 0 first.
    pub players: Vec<PlayerSnapshot>,
    /// True only on the observation handed out before the first decision.
    pub first_step: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("video sequence is empty")]
    EmptySequence,
    #[error("video {video}: watch duration {watch_ms} ms exceeds its {duration_ms} ms length")]
    DurationMismatch {
        video: usize,
        watch_ms: u64,
        duration_ms: u64,
    },
    #[error("watch durations ({got}) do not match sequence length ({expected})")]
    DurationCountMismatch { got: usize, expected: usize },
    #[error("slot {slot} outside the current window of {occupancy}")]
    SlotOutOfWindow { slot: usize, occupancy: usize },
    #[error("video {video} is already fully downloaded")]
    VideoFullyDownloaded { video: usize },
    #[error("session already ended")]
    SessionEnded,
    #[error("sleep duration must be > 0")]
    ZeroSleep,
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
}
