//! Full-knowledge reference policy for dominance tests: it knows every
//! hidden watch duration and the whole network trace, downloads exactly the
//! chunks that will be played, and picks the highest level that still lands
//! before each chunk's play deadline.

use super::{Algorithm, AlgorithmContext};
use crate::engine::{Decision, Level, Observation, PlayerSnapshot};
use crate::traces::{NetworkTrace, LEVELS};
use std::sync::Arc;

pub struct OracleAlgorithm {
    /// Hidden watch duration per sequence video id.
    watch_ms: Vec<u64>,
    network: Arc<NetworkTrace>,
    clock_ms: u64,
}

impl OracleAlgorithm {
    pub fn new(watch_ms: Vec<u64>, network: Arc<NetworkTrace>) -> Self {
        Self {
            watch_ms,
            network,
            clock_ms: 0,
        }
    }

    /// Chunks of a video the viewer will actually reach.
    fn needed_chunks(&self, player: &PlayerSnapshot) -> usize {
        let watch = self.watch_ms[player.video_id];
        let full = player.chunk_count;
        (watch.div_ceil(player.chunk_duration_ms) as usize).min(full)
    }

    /// Wall time until playback reaches the next chunk of `players[slot]`,
    /// assuming stall-free playback from here on.
    fn deadline_offset_ms(&self, players: &[PlayerSnapshot], slot: usize) -> u64 {
        let mut offset = 0;
        for (i, player) in players.iter().enumerate().take(slot + 1) {
            let cursor = cursor_ms(player);
            if i == slot {
                let start = player.downloaded_chunks as u64 * player.chunk_duration_ms;
                offset += start.saturating_sub(cursor);
            } else {
                offset += self.watch_ms[player.video_id].saturating_sub(cursor);
            }
        }
        offset
    }
}

fn cursor_ms(player: &PlayerSnapshot) -> u64 {
    let downloaded_ms = if player.downloaded_chunks == player.chunk_count {
        player.total_duration_ms
    } else {
        player.downloaded_chunks as u64 * player.chunk_duration_ms
    };
    downloaded_ms - player.buffer_ms
}

impl Algorithm for OracleAlgorithm {
    fn name(&self) -> &str {
        "oracle"
    }

    fn initialize(&mut self, _ctx: &AlgorithmContext) {
        self.clock_ms = 0;
    }

    fn decide(&mut self, obs: &Observation) -> Decision {
        self.clock_ms += obs.delay_ms;
        for (slot, player) in obs.players.iter().enumerate() {
            if player.downloaded_chunks >= self.needed_chunks(player) {
                continue;
            }
            let Some(sizes) = player.next_chunk_bits else {
                continue;
            };
            let deadline = self.deadline_offset_ms(&obs.players, slot);
            // Highest level that completes before the chunk is needed;
            // when even the lowest is late the stall is unavoidable and
            // the smallest chunk minimizes it.
            let mut level = 0;
            for candidate in (0..LEVELS).rev() {
                if self.network.download_time(self.clock_ms, sizes[candidate]) <= deadline {
                    level = candidate;
                    break;
                }
            }
            return Decision::Download {
                slot,
                level: Level::new(level).expect("level within the ladder"),
            };
        }
        Decision::Sleep { ms: 500 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_session, Session, SessionConfig};
    use crate::retention::WatchDuration;
    use crate::scoring::{score_session, waste_report, QoeCoefficients};
    use crate::traces::{RetentionCurve, VideoAsset};

    fn video(name: &str, chunks: usize) -> Arc<VideoAsset> {
        let mut f: Vec<f64> = (0..=chunks as u32).map(|s| 1.0 / (1.0 + s as f64)).collect();
        f[0] = 1.0;
        f.push(0.0);
        Arc::new(
            VideoAsset::new(
                name,
                vec![[93_750, 150_000, 231_250]; chunks],
                [750, 1200, 1850],
                RetentionCurve::new(f).unwrap(),
            )
            .unwrap(),
        )
    }

    fn net(mbps: f64) -> Arc<NetworkTrace> {
        Arc::new(NetworkTrace::from_points("net", &[(0.0, mbps), (1.0, mbps)]).unwrap())
    }

    #[test]
    fn oracle_downloads_exactly_the_played_chunks() {
        let videos = vec![video("a", 8), video("b", 6)];
        let network = net(4.0);
        let watches = vec![WatchDuration::from_ms(3500), WatchDuration::from_ms(6000)];
        let mut session = Session::new(
            videos,
            network.clone(),
            &watches,
            SessionConfig::default(),
        )
        .unwrap();
        let mut oracle =
            OracleAlgorithm::new(vec![3500, 6000], network);
        let trajectory = run_session(&mut session, &mut oracle).unwrap();
        // ceil(3500/1000) + ceil(6000/1000) chunks, nothing more.
        assert_eq!(trajectory.downloads.len(), 4 + 6);
        assert_eq!(waste_report(&trajectory).total_megabits, 0.0);
    }

    #[test]
    fn oracle_full_watch_downloads_the_whole_video() {
        let videos = vec![video("a", 5)];
        let network = net(3.0);
        let mut session = Session::new(
            videos,
            network.clone(),
            &[WatchDuration::from_ms(5000)],
            SessionConfig::default(),
        )
        .unwrap();
        let mut oracle = OracleAlgorithm::new(vec![5000], network);
        let trajectory = run_session(&mut session, &mut oracle).unwrap();
        assert_eq!(trajectory.downloads.len(), 5);
        assert!(trajectory.ended);
    }

    #[test]
    fn ample_bandwidth_lets_the_oracle_climb_the_ladder() {
        // 20 Mbps: every chunk after the first fits at the top level.
        let videos = vec![video("a", 6)];
        let network = net(20.0);
        let mut session = Session::new(
            videos,
            network.clone(),
            &[WatchDuration::from_ms(6000)],
            SessionConfig::default(),
        )
        .unwrap();
        let mut oracle = OracleAlgorithm::new(vec![6000], network);
        let trajectory = run_session(&mut session, &mut oracle).unwrap();
        let top = trajectory
            .downloads
            .iter()
            .filter(|d| d.level == Level::TOP)
            .count();
        assert!(top >= 4, "only {top} top-level chunks");
        let score = score_session(&trajectory, &QoeCoefficients::default()).unwrap();
        assert!(score.session_score > 0.0);
    }
}
