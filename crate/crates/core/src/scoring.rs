//! Session utility: per-video QoE minus bandwidth cost, computed from the
//! engine ledgers.
//!
//! For video `i`, with `j` ranging over its played chunks and `k` over its
//! downloaded chunks:
//!
//! ```text
//! U_i = alpha * sum_j R_j  -  gamma * sum_j |R_j - R_{j-1}|
//!       - beta * rebuf_seconds_i  -  theta * megabits_i
//! ```
//!
//! `R_j` is the chunk's nominal ladder rate in Mbps; smoothness never spans
//! a video boundary and the first played chunk of a video contributes no
//! smoothness term. Every completed download is charged, played or not;
//! rebuffering is charged to the video whose chunk was in flight (for
//! sleeps, to the video playing when the stall began). The session score is
//! the sum of the `U_i`.

use crate::engine::Trajectory;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Weights of the utility terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoeCoefficients {
    /// Quality weight.
    pub alpha: f64,
    /// Rebuffer weight, per second.
    pub beta: f64,
    /// Smoothness weight.
    pub gamma: f64,
    /// Bandwidth weight, per megabit.
    pub theta: f64,
}

impl Default for QoeCoefficients {
    fn default() -> Self {
        // beta matches the top ladder rate: one second of stalling cancels
        // one top-rate chunk's quality.
        Self {
            alpha: 1.0,
            beta: 1.85,
            gamma: 1.0,
            theta: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("trajectory does not cover a completed session")]
    IncompleteTrajectory,
}

/// Per-video utility terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScore {
    pub video_id: usize,
    pub name: String,
    pub played_chunks: usize,
    /// Sum of played-chunk rates, in Mbps.
    pub quality: f64,
    /// Sum of rate switches between consecutive played chunks, in Mbps.
    pub smoothness: f64,
    pub rebuf_seconds: f64,
    /// All downloaded bits charged to this video, in megabits.
    pub megabits: f64,
    pub utility: f64,
}

/// Full breakdown of one session's score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoeBreakdown {
    pub videos: Vec<VideoScore>,
    /// Sum of per-video utilities.
    pub session_score: f64,
    /// Downloaded-but-never-played bits, in megabits (reported, not part of
    /// the utility beyond its bandwidth charge).
    pub waste_megabits: f64,
}

/// Scores a completed session under the given coefficients.
pub fn score_session(
    trajectory: &Trajectory,
    coefficients: &QoeCoefficients,
) -> Result<QoeBreakdown, ScoreError> {
    if !trajectory.ended {
        return Err(ScoreError::IncompleteTrajectory);
    }
    let mut rebuf_ms: BTreeMap<usize, u64> = BTreeMap::new();
    for step in &trajectory.steps {
        if step.rebuf_ms > 0 {
            if let Some(video) = step.rebuf_video_id {
                *rebuf_ms.entry(video).or_default() += step.rebuf_ms;
            }
        }
    }
    let mut bits: BTreeMap<usize, u64> = BTreeMap::new();
    for dl in &trajectory.downloads {
        *bits.entry(dl.video_id).or_default() += dl.size_bits;
    }

    let mut videos = Vec::with_capacity(trajectory.playback.len());
    let mut session_score = 0.0;
    for record in &trajectory.playback {
        let played = record.played_chunks();
        let rates: Vec<f64> = record.levels[..played]
            .iter()
            .map(|level| record.ladder_kbps[level.index()] as f64 / 1000.0)
            .collect();
        let quality: f64 = rates.iter().sum();
        let smoothness: f64 = rates.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        let rebuf_seconds =
            rebuf_ms.remove(&record.video_id).unwrap_or(0) as f64 / 1000.0;
        let megabits = bits.remove(&record.video_id).unwrap_or(0) as f64 / 1e6;
        let utility = coefficients.alpha * quality - coefficients.gamma * smoothness
            - coefficients.beta * rebuf_seconds
            - coefficients.theta * megabits;
        session_score += utility;
        videos.push(VideoScore {
            video_id: record.video_id,
            name: record.name.clone(),
            played_chunks: played,
            quality,
            smoothness,
            rebuf_seconds,
            megabits,
            utility,
        });
    }
    // Charges whose video never reached the playback ledger (possible in
    // hand-built trajectories) still count against the session.
    for (video_id, ms) in rebuf_ms {
        let rebuf_seconds = ms as f64 / 1000.0;
        let megabits = bits.remove(&video_id).unwrap_or(0) as f64 / 1e6;
        let utility =
            -coefficients.beta * rebuf_seconds - coefficients.theta * megabits;
        session_score += utility;
        videos.push(VideoScore {
            video_id,
            name: String::new(),
            played_chunks: 0,
            quality: 0.0,
            smoothness: 0.0,
            rebuf_seconds,
            megabits,
            utility,
        });
    }
    for (video_id, b) in bits {
        let megabits = b as f64 / 1e6;
        let utility = -coefficients.theta * megabits;
        session_score += utility;
        videos.push(VideoScore {
            video_id,
            name: String::new(),
            played_chunks: 0,
            quality: 0.0,
            smoothness: 0.0,
            rebuf_seconds: 0.0,
            megabits,
            utility,
        });
    }
    videos.sort_by_key(|v| v.video_id);

    Ok(QoeBreakdown {
        waste_megabits: waste_report(trajectory).total_megabits,
        videos,
        session_score,
    })
}

/// Why a chunk's bits were wasted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WasteCause {
    /// The video never played a millisecond (prefetched, never reached).
    UnplayedVideo,
    /// Chunks past the viewer's departure point in a watched video.
    WatchedTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoWaste {
    pub video_id: usize,
    pub cause: WasteCause,
    /// Indices of the wasted chunks.
    pub chunks: Vec<usize>,
    pub megabits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WasteReport {
    pub total_megabits: f64,
    pub videos: Vec<VideoWaste>,
}

/// Bits of every downloaded chunk playback never reached, per video.
pub fn waste_report(trajectory: &Trajectory) -> WasteReport {
    let played: BTreeMap<usize, usize> = trajectory
        .playback
        .iter()
        .map(|p| (p.video_id, p.played_chunks()))
        .collect();
    let watched: BTreeMap<usize, bool> = trajectory
        .playback
        .iter()
        .map(|p| (p.video_id, p.played_ms > 0))
        .collect();
    let mut by_video: BTreeMap<usize, (Vec<usize>, u64)> = BTreeMap::new();
    for dl in &trajectory.downloads {
        let first_unplayed = played.get(&dl.video_id).copied().unwrap_or(0);
        if dl.chunk >= first_unplayed {
            let entry = by_video.entry(dl.video_id).or_default();
            entry.0.push(dl.chunk);
            entry.1 += dl.size_bits;
        }
    }
    let mut total_bits = 0u64;
    let videos = by_video
        .into_iter()
        .map(|(video_id, (mut chunks, bits))| {
            chunks.sort_unstable();
            total_bits += bits;
            VideoWaste {
                video_id,
                cause: if watched.get(&video_id).copied().unwrap_or(false) {
                    WasteCause::WatchedTail
                } else {
                    WasteCause::UnplayedVideo
                },
                chunks,
                megabits: bits as f64 / 1e6,
            }
        })
        .collect();
    WasteReport {
        total_megabits: total_bits as f64 / 1e6,
        videos,
    }
}
