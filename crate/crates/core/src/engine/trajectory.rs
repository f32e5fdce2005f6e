//! Session ledgers: the per-step record stream plus the download and
//! playback ledgers scoring runs on.

use super::{Decision, Level};
use crate::traces::LEVELS;
use serde::{Deserialize, Serialize};

/// Serialized form of a [`Decision`] inside step records.
pub type DecisionRecord = Decision;

/// One simulator step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub decision: DecisionRecord,
    pub delay_ms: u64,
    pub rebuf_ms: u64,
    /// Wall time after the final video ended (nonzero only in the last step).
    pub idle_ms: u64,
    pub video_size_bits: u64,
    pub play_video_id: usize,
    pub end_of_video: bool,
    /// Buffer of each window slot after the step.
    pub buffers_ms: Vec<u64>,
    /// Video charged with this step's rebuffering: the downloaded chunk's
    /// owner for downloads, the video playing when the stall began for
    /// sleeps. `None` when no rebuffering occurred.
    pub rebuf_video_id: Option<usize>,
}

/// One completed chunk download.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownloadRecord {
    pub step: u64,
    pub video_id: usize,
    pub chunk: usize,
    pub level: Level,
    pub size_bits: u64,
}

/// Final playback state of one sequence video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaybackRecord {
    pub video_id: usize,
    pub name: String,
    /// Final play-cursor position; equals the watch duration once the video
    /// has been swiped away.
    pub played_ms: u64,
    /// Ladder level of each downloaded chunk, in download (= chunk) order.
    pub levels: Vec<Level>,
    pub chunk_count: usize,
    pub chunk_duration_ms: u64,
    pub total_duration_ms: u64,
    pub ladder_kbps: [u32; LEVELS],
}

impl PlaybackRecord {
    /// Chunks whose start playback strictly passed; always a prefix.
    pub fn played_chunks(&self) -> usize {
        self.levels
            .iter()
            .enumerate()
            .take_while(|(chunk, _)| (*chunk as u64) * self.chunk_duration_ms < self.played_ms)
            .count()
    }
}

/// Everything a finished (or aborted) session leaves behind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub ended: bool,
    pub steps: Vec<StepRecord>,
    pub downloads: Vec<DownloadRecord>,
    pub playback: Vec<PlaybackRecord>,
}

impl Trajectory {
    /// Total wall time, which equals the final session clock.
    pub fn total_delay_ms(&self) -> u64 {
        self.steps.iter().map(|s| s.delay_ms).sum()
    }

    pub fn total_rebuf_ms(&self) -> u64 {
        self.steps.iter().map(|s| s.rebuf_ms).sum()
    }

    pub fn total_downloaded_bits(&self) -> u64 {
        self.downloads.iter().map(|d| d.size_bits).sum()
    }

    pub fn total_played_ms(&self) -> u64 {
        self.playback.iter().map(|p| p.played_ms).sum()
    }
}
