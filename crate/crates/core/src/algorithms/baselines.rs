//! The baseline policy families: industry-style no-prefetch and fixed
//! prefetch, plus a buffer-threshold heuristic that weighs retention.

use super::estimators::{EstimateMethod, ThroughputHistory};
use super::{rate_match, Algorithm, AlgorithmContext};
use crate::engine::{Decision, Level, Observation, PlayerSnapshot};
use crate::traces::LEVELS;

const IDLE_SLEEP_MS: u64 = 500;

fn cursor_ms(player: &PlayerSnapshot) -> u64 {
    let downloaded_ms = if player.downloaded_chunks == player.chunk_count {
        player.total_duration_ms
    } else {
        player.downloaded_chunks as u64 * player.chunk_duration_ms
    };
    downloaded_ms - player.buffer_ms
}

/// Downloads the earliest incomplete window video, in order, and only then
/// the next one; rate-matches a harmonic estimate.
pub struct NoPrefetch {
    history: ThroughputHistory,
    ladder_kbps: [u32; LEVELS],
}

impl NoPrefetch {
    pub fn new(window: usize) -> Self {
        Self {
            history: ThroughputHistory::new(window),
            ladder_kbps: AlgorithmContext::default().ladder_kbps,
        }
    }

    pub fn from_context(ctx: &AlgorithmContext) -> Self {
        let mut np = Self::new(ctx.param_usize("estimator_window", 5));
        np.ladder_kbps = ctx.ladder_kbps;
        np
    }
}

impl Algorithm for NoPrefetch {
    fn name(&self) -> &str {
        "no_prefetch"
    }

    fn decide(&mut self, obs: &Observation) -> Decision {
        self.history.record(obs.video_size_bits, obs.delay_ms);
        let estimate = self
            .history
            .estimate(EstimateMethod::Harmonic)
            .ok()
            .map(|e| e.mbps);
        for (slot, player) in obs.players.iter().enumerate() {
            if player.downloaded_chunks < player.chunk_count {
                let level = rate_match(&self.ladder_kbps, estimate, 1.0);
                return Decision::Download {
                    slot,
                    level: Level::new(level).expect("rate_match stays on the ladder"),
                };
            }
        }
        Decision::Sleep { ms: IDLE_SLEEP_MS }
    }
}

/// Keeps the playing video ahead by a target buffer, then fills upcoming
/// slots to a fixed chunk count at one fixed level.
pub struct FixedPrefetch {
    prefetch_chunks: usize,
    level: Level,
    slot0_target_ms: u64,
}

impl FixedPrefetch {
    pub fn new(prefetch_chunks: usize, level: Level, slot0_target_ms: u64) -> Self {
        Self {
            prefetch_chunks,
            level,
            slot0_target_ms,
        }
    }

    pub fn from_context(ctx: &AlgorithmContext) -> Self {
        let level = Level::new(ctx.param_usize("level", 0)).unwrap_or(Level::LOW);
        Self::new(
            ctx.param_usize("prefetch_chunks", 4),
            level,
            ctx.param_u64("slot0_target_ms", 5000),
        )
    }
}

impl Algorithm for FixedPrefetch {
    fn name(&self) -> &str {
        "fixed_prefetch"
    }

    fn decide(&mut self, obs: &Observation) -> Decision {
        if let Some(current) = obs.players.first() {
            if current.downloaded_chunks < current.chunk_count
                && current.buffer_ms < self.slot0_target_ms
            {
                return Decision::Download {
                    slot: 0,
                    level: self.level,
                };
            }
        }
        for (slot, player) in obs.players.iter().enumerate().skip(1) {
            let target = self.prefetch_chunks.min(player.chunk_count);
            if player.downloaded_chunks < target {
                return Decision::Download {
                    slot,
                    level: self.level,
                };
            }
        }
        Decision::Sleep { ms: IDLE_SLEEP_MS }
    }
}

/// Buffer-threshold heuristic: protect the playing video below a low-water
/// mark, otherwise prefetch the window video with the highest
/// retention-weighted play probability among those under a high-water mark,
/// and pause when every buffer is topped up.
pub struct ThresholdHeuristic {
    low_ms: u64,
    high_ms: u64,
    safety: f64,
    method: EstimateMethod,
    history: ThroughputHistory,
    ladder_kbps: [u32; LEVELS],
}

impl ThresholdHeuristic {
    pub fn new(low_ms: u64, high_ms: u64, safety: f64, method: EstimateMethod, window: usize) -> Self {
        Self {
            low_ms,
            high_ms,
            safety,
            method,
            history: ThroughputHistory::new(window),
            ladder_kbps: AlgorithmContext::default().ladder_kbps,
        }
    }

    pub fn from_context(ctx: &AlgorithmContext) -> Self {
        let method = match ctx.params.get("estimator").map(String::as_str) {
            Some("moving_average") => EstimateMethod::MovingAverage,
            _ => EstimateMethod::Harmonic,
        };
        let mut th = Self::new(
            ctx.param_u64("low_ms", 1000),
            ctx.param_u64("high_ms", 4000),
            ctx.param_f64("safety", 0.9),
            method,
            ctx.param_usize("estimator_window", 5),
        );
        th.ladder_kbps = ctx.ladder_kbps;
        th
    }

    /// Probability that the next chunk of the video at `slot` will ever be
    /// played: the chance every earlier queued video is watched to its end
    /// (conditioned on its current position), times the chance this video is
    /// watched past the chunk's start.
    fn play_probability(players: &[PlayerSnapshot], slot: usize) -> f64 {
        let mut p = 1.0;
        for predecessor in players.iter().take(slot).skip(1) {
            p *= conditional_finish(predecessor);
        }
        let player = &players[slot];
        let start_ms = player.downloaded_chunks as u64 * player.chunk_duration_ms;
        let at_cursor = player.retention.fraction_at_ms(cursor_ms(player));
        if at_cursor <= 0.0 {
            return 0.0;
        }
        p * player.retention.fraction_at_ms(start_ms) / at_cursor
    }
}

/// P(watched to the very end | already at the current cursor).
fn conditional_finish(player: &PlayerSnapshot) -> f64 {
    let at_cursor = player.retention.fraction_at_ms(cursor_ms(player));
    if at_cursor <= 0.0 {
        return 0.0;
    }
    player.retention.fraction_at(player.retention.final_second()) / at_cursor
}

impl Algorithm for ThresholdHeuristic {
    fn name(&self) -> &str {
        "threshold"
    }

    fn decide(&mut self, obs: &Observation) -> Decision {
        self.history.record(obs.video_size_bits, obs.delay_ms);
        let estimate = self.history.estimate(self.method).ok().map(|e| e.mbps);
        let level = |safety: f64| {
            Level::new(rate_match(&self.ladder_kbps, estimate, safety))
                .expect("rate_match stays on the ladder")
        };

        // Low-water rule: never let the playing video starve.
        if let Some(current) = obs.players.first() {
            if current.downloaded_chunks < current.chunk_count && current.buffer_ms < self.low_ms {
                return Decision::Download {
                    slot: 0,
                    level: level(1.0),
                };
            }
        }

        // Most-valuable prefetch below the high-water mark.
        let candidate = obs
            .players
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                p.downloaded_chunks < p.chunk_count && p.buffer_ms < self.high_ms
            })
            .map(|(slot, _)| (slot, Self::play_probability(&obs.players, slot)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((slot, probability)) = candidate {
            if probability > 0.0 {
                return Decision::Download {
                    slot,
                    level: level(self.safety),
                };
            }
        }

        // Everything topped up: drain toward the high-water mark.
        let ms = obs
            .players
            .first()
            .map(|p| p.buffer_ms.saturating_sub(self.high_ms))
            .filter(|&ms| ms > 0)
            .unwrap_or(IDLE_SLEEP_MS)
            .min(IDLE_SLEEP_MS);
        Decision::Sleep { ms }
    }
}
