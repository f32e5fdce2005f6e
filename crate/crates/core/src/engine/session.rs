//! Session state and the step loop.

use super::trajectory::{DownloadRecord, PlaybackRecord, StepRecord, Trajectory};
use super::{Decision, EngineError, Observation, PlayerSnapshot, WINDOW_SIZE};
use crate::algorithms::Algorithm;
use crate::retention::WatchDuration;
use crate::traces::{NetworkTrace, VideoAsset};
use std::collections::VecDeque;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    /// Window slots, at most [`WINDOW_SIZE`].
    pub window_size: usize,
    /// Step ceiling enforced by [`run_session`].
    pub max_steps: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            window_size: WINDOW_SIZE,
            max_steps: 1_000_000,
        }
    }
}

/// One video loaded into the window.
#[derive(Debug, Clone)]
struct Player {
    id: usize,
    video: Arc<VideoAsset>,
    downloaded: usize,
    levels: Vec<super::Level>,
    cursor_ms: u64,
    watch_ms: u64,
}

impl Player {
    fn new(id: usize, video: Arc<VideoAsset>, watch_ms: u64) -> Self {
        Self {
            id,
            video,
            downloaded: 0,
            levels: Vec::new(),
            cursor_ms: 0,
            watch_ms,
        }
    }

    fn downloaded_ms(&self) -> u64 {
        if self.downloaded == self.video.chunk_count() {
            self.video.duration_ms()
        } else {
            self.downloaded as u64 * self.video.chunk_duration_ms()
        }
    }

    /// Downloaded-but-unplayed duration.
    fn buffer_ms(&self) -> u64 {
        self.downloaded_ms() - self.cursor_ms
    }

    fn fully_downloaded(&self) -> bool {
        self.downloaded == self.video.chunk_count()
    }

    fn snapshot(&self) -> PlayerSnapshot {
        PlayerSnapshot {
            video_id: self.id,
            name: self.video.name().to_string(),
            chunk_count: self.video.chunk_count(),
            downloaded_chunks: self.downloaded,
            buffer_ms: self.buffer_ms(),
            next_chunk_bits: (!self.fully_downloaded())
                .then(|| self.video.chunk_bits(self.downloaded)),
            chunk_duration_ms: self.video.chunk_duration_ms(),
            total_duration_ms: self.video.duration_ms(),
            ladder_kbps: self.video.ladder_kbps(),
            retention: Arc::new(self.video.retention().clone()),
        }
    }

    fn into_record(self) -> PlaybackRecord {
        PlaybackRecord {
            video_id: self.id,
            name: self.video.name().to_string(),
            played_ms: self.cursor_ms,
            levels: self.levels,
            chunk_count: self.video.chunk_count(),
            chunk_duration_ms: self.video.chunk_duration_ms(),
            total_duration_ms: self.video.duration_ms(),
            ladder_kbps: self.video.ladder_kbps(),
        }
    }
}

struct PlayOutcome {
    rebuf_ms: u64,
    idle_ms: u64,
    /// Video playing when a stall began, if one did.
    stall_video: Option<usize>,
}

/// A single viewing session: one network trace, one video sequence, one set
/// of hidden watch durations. Strictly one `step` at a time.
#[derive(Debug)]
pub struct Session {
    videos: Vec<Arc<VideoAsset>>,
    /// Hidden watch duration per sequence video.
    watch_ms: Vec<u64>,
    network: Arc<NetworkTrace>,
    config: SessionConfig,
    window: VecDeque<Player>,
    /// Next sequence index to enter the window.
    next_entry: usize,
    clock_ms: u64,
    ended: bool,
    last_play_id: usize,
    steps: Vec<StepRecord>,
    downloads: Vec<DownloadRecord>,
    retired: Vec<PlaybackRecord>,
}

impl Session {
    pub fn new(
        videos: Vec<Arc<VideoAsset>>,
        network: Arc<NetworkTrace>,
        watch_durations: &[WatchDuration],
        config: SessionConfig,
    ) -> Result<Self, EngineError> {
        if videos.is_empty() {
            return Err(EngineError::EmptySequence);
        }
        if watch_durations.len() != videos.len() {
            return Err(EngineError::DurationCountMismatch {
                got: watch_durations.len(),
                expected: videos.len(),
            });
        }
        for (i, (video, watch)) in videos.iter().zip(watch_durations).enumerate() {
            if watch.ms() > video.duration_ms() {
                return Err(EngineError::DurationMismatch {
                    video: i,
                    watch_ms: watch.ms(),
                    duration_ms: video.duration_ms(),
                });
            }
        }
        if config.window_size == 0 || config.window_size > WINDOW_SIZE {
            return Err(EngineError::InvalidConfig(format!(
                "window size must be in 1..={WINDOW_SIZE}"
            )));
        }
        let watch_ms: Vec<u64> = watch_durations.iter().map(|w| w.ms()).collect();
        let occupancy = config.window_size.min(videos.len());
        let window: VecDeque<Player> = (0..occupancy)
            .map(|i| Player::new(i, videos[i].clone(), watch_ms[i]))
            .collect();
        Ok(Self {
            last_play_id: window[0].id,
            videos,
            watch_ms,
            network,
            config,
            window,
            next_entry: occupancy,
            clock_ms: 0,
            ended: false,
            steps: Vec::new(),
            downloads: Vec::new(),
            retired: Vec::new(),
        })
    }

    pub fn clock_ms(&self) -> u64 {
        self.clock_ms
    }

    pub fn ended(&self) -> bool {
        self.ended
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps.len() as u64
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    /// The pre-step view handed to the algorithm before its first decision.
    pub fn initial_observation(&self) -> Observation {
        Observation {
            delay_ms: 0,
            rebuf_ms: 0,
            video_size_bits: 0,
            end_of_video: false,
            play_video_id: self.last_play_id,
            players: self.window.iter().map(Player::snapshot).collect(),
            first_step: true,
        }
    }

    /// Executes one decision and advances the clock by its wall time.
    pub fn step(&mut self, decision: Decision) -> Result<Observation, EngineError> {
        if self.ended {
            return Err(EngineError::SessionEnded);
        }
        match decision {
            Decision::Sleep { ms } => {
                if ms == 0 {
                    return Err(EngineError::ZeroSleep);
                }
                let outcome = self.play(ms);
                self.clock_ms += ms;
                let attrib = outcome.stall_video;
                Ok(self.record_step(decision, ms, outcome, 0, false, attrib))
            }
            Decision::Download { slot, level } => {
                if slot >= self.window.len() {
                    return Err(EngineError::SlotOutOfWindow {
                        slot,
                        occupancy: self.window.len(),
                    });
                }
                let (owner, chunk, video) = {
                    let p = &self.window[slot];
                    if p.fully_downloaded() {
                        return Err(EngineError::VideoFullyDownloaded { video: p.id });
                    }
                    (p.id, p.downloaded, p.video.clone())
                };
                let size_bits = video.size_bits(chunk, level.index());
                let delay = self.network.download_time(self.clock_ms, size_bits);
                let outcome = self.play(delay);
                // The chunk completes no matter what happened to its video;
                // the buffer credit lands only if the video is still around.
                if let Some(p) = self.window.iter_mut().find(|p| p.id == owner) {
                    p.downloaded += 1;
                    p.levels.push(level);
                }
                self.downloads.push(DownloadRecord {
                    step: self.steps.len() as u64,
                    video_id: owner,
                    chunk,
                    level,
                    size_bits,
                });
                self.clock_ms += delay;
                let end_of_video = chunk + 1 == video.chunk_count();
                let attrib = (outcome.rebuf_ms > 0).then_some(owner);
                Ok(self.record_step(decision, delay, outcome, size_bits, end_of_video, attrib))
            }
        }
    }

    fn record_step(
        &mut self,
        decision: Decision,
        delay_ms: u64,
        outcome: PlayOutcome,
        video_size_bits: u64,
        end_of_video: bool,
        rebuf_video_id: Option<usize>,
    ) -> Observation {
        if let Some(front) = self.window.front() {
            self.last_play_id = front.id;
        }
        self.steps.push(StepRecord {
            step: self.steps.len() as u64,
            decision,
            delay_ms,
            rebuf_ms: outcome.rebuf_ms,
            idle_ms: outcome.idle_ms,
            video_size_bits,
            play_video_id: self.last_play_id,
            end_of_video,
            buffers_ms: self.window.iter().map(Player::buffer_ms).collect(),
            rebuf_video_id,
        });
        Observation {
            delay_ms,
            rebuf_ms: outcome.rebuf_ms,
            video_size_bits,
            end_of_video,
            play_video_id: self.last_play_id,
            players: self.window.iter().map(Player::snapshot).collect(),
            first_step: false,
        }
    }

    /// Simulates playback over `wall_ms` of wall time: the current video
    /// drains its buffer, a swipe fires the moment a watch duration is
    /// reached (several may fire in one step), and an empty buffer stalls
    /// playback for the rest of the step since chunks are only credited at
    /// step end.
    fn play(&mut self, wall_ms: u64) -> PlayOutcome {
        let mut remaining = wall_ms;
        let mut rebuf_ms = 0;
        let mut idle_ms = 0;
        let mut stall_video = None;
        loop {
            let Some(current) = self.window.front() else {
                idle_ms += remaining;
                break;
            };
            if current.cursor_ms >= current.watch_ms {
                self.swipe();
                continue;
            }
            if remaining == 0 {
                break;
            }
            let current = self.window.front_mut().expect("window checked above");
            let buffered = current.buffer_ms();
            if buffered == 0 {
                rebuf_ms += remaining;
                stall_video = Some(current.id);
                break;
            }
            let watch_left = current.watch_ms - current.cursor_ms;
            let played = remaining.min(watch_left).min(buffered);
            current.cursor_ms += played;
            remaining -= played;
            // Loop back: a watch-point hit swipes at the top, even when the
            // wall time is exactly used up.
        }
        PlayOutcome {
            rebuf_ms,
            idle_ms,
            stall_video,
        }
    }

    /// Retires the current video and pulls the next sequence video (if any)
    /// into the back of the window.
    fn swipe(&mut self) {
        let done = self.window.pop_front().expect("swipe requires a current video");
        self.retired.push(done.into_record());
        if self.next_entry < self.videos.len() {
            let id = self.next_entry;
            self.window
                .push_back(Player::new(id, self.videos[id].clone(), self.watch_ms[id]));
            self.next_entry += 1;
        }
        if self.window.is_empty() {
            self.ended = true;
        }
    }

    /// Ledger snapshot; complete once `ended` is true.
    pub fn trajectory(&self) -> Trajectory {
        let mut playback = self.retired.clone();
        playback.extend(self.window.iter().cloned().map(Player::into_record));
        playback.sort_by_key(|p| p.video_id);
        Trajectory {
            ended: self.ended,
            steps: self.steps.clone(),
            downloads: self.downloads.clone(),
            playback,
        }
    }
}

/// Why a session run stopped early.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("algorithm produced an invalid decision at step {step}: {source}")]
    Algorithm {
        step: u64,
        #[source]
        source: EngineError,
    },
    #[error("session did not terminate within {max_steps} steps")]
    NonTerminating { max_steps: u64 },
}

/// Drives observation -> decision -> step until the session ends, and
/// returns the full ledger set.
pub fn run_session(
    session: &mut Session,
    algorithm: &mut dyn Algorithm,
) -> Result<Trajectory, RunError> {
    let mut observation = session.initial_observation();
    while !session.ended() {
        if session.steps_taken() >= session.config.max_steps {
            return Err(RunError::NonTerminating {
                max_steps: session.config.max_steps,
            });
        }
        let decision = algorithm.decide(&observation);
        observation = session.step(decision).map_err(|source| RunError::Algorithm {
            step: session.steps_taken(),
            source,
        })?;
    }
    Ok(session.trajectory())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Level;
    use crate::traces::{sample_manifest, RetentionCurve};

    fn curve(seconds: u32) -> RetentionCurve {
        let mut f: Vec<f64> = (0..=seconds).map(|s| (1.0 - 0.01 * s as f64).max(0.01)).collect();
        f[0] = 1.0;
        f.push(0.0);
        RetentionCurve::new(f).unwrap()
    }

    /// `bytes[level]` repeated for every chunk.
    fn video(name: &str, chunks: usize, bytes: [u64; 3]) -> Arc<VideoAsset> {
        Arc::new(
            VideoAsset::new(name, vec![bytes; chunks], [750, 1200, 1850], curve(chunks as u32))
                .unwrap(),
        )
    }

    fn net(mbps: f64) -> Arc<NetworkTrace> {
        Arc::new(NetworkTrace::from_points("net", &[(0.0, mbps), (1.0, mbps)]).unwrap())
    }

    fn watches(ms: &[u64]) -> Vec<WatchDuration> {
        ms.iter().map(|&m| WatchDuration::from_ms(m)).collect()
    }

    #[test]
    fn window_fills_to_five_from_the_sample_sequence() {
        let videos = sample_manifest();
        let full: Vec<WatchDuration> = videos
            .iter()
            .map(|v| WatchDuration::from_ms(v.duration_ms()))
            .collect();
        let session =
            Session::new(videos, net(2.0), &full, SessionConfig::default()).unwrap();
        let obs = session.initial_observation();
        assert_eq!(obs.players.len(), 5);
        assert_eq!(obs.players[0].name, "tj");
        assert!(obs.first_step);
        assert_eq!(obs.play_video_id, 0);
    }

    #[test]
    fn single_video_sequence_yields_a_window_of_one() {
        let session = Session::new(
            vec![video("v", 3, [1000, 2000, 3000])],
            net(2.0),
            &watches(&[1500]),
            SessionConfig::default(),
        )
        .unwrap();
        assert_eq!(session.initial_observation().players.len(), 1);
    }

    #[test]
    fn watch_duration_beyond_video_length_is_rejected() {
        let err = Session::new(
            vec![video("v", 3, [1000, 2000, 3000])],
            net(2.0),
            &watches(&[3001]),
            SessionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::DurationMismatch { video: 0, .. }));
    }

    #[test]
    fn first_download_stalls_until_the_chunk_lands() {
        // 1.85 Mb at 2 Mbps takes 925 ms; the buffer was empty the whole way.
        let mut session = Session::new(
            vec![video("v", 5, [93_750, 150_000, 231_250])],
            net(2.0),
            &watches(&[5000]),
            SessionConfig::default(),
        )
        .unwrap();
        let obs = session
            .step(Decision::Download { slot: 0, level: Level::TOP })
            .unwrap();
        assert_eq!(obs.delay_ms, 925);
        assert_eq!(obs.rebuf_ms, 925);
        assert_eq!(obs.video_size_bits, 1_850_000);
        assert_eq!(obs.players[0].buffer_ms, 1000);
        assert_eq!(session.clock_ms(), 925);
    }

    #[test]
    fn steady_state_download_keeps_the_buffer_level() {
        let mut session = Session::new(
            vec![video("v", 30, [125_000, 125_000, 250_000])],
            net(2.0),
            &watches(&[30_000]),
            SessionConfig::default(),
        )
        .unwrap();
        // Five low-level chunks at 1 Mb / 2 Mbps = 500 ms each: after the
        // startup stall, each step drains 500 and credits 1000, so the
        // buffer reaches 5000 - 2000 = 3000 ms.
        for _ in 0..5 {
            session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        }
        let obs = session
            .step(Decision::Download { slot: 0, level: Level::MID })
            .unwrap();
        // 1 Mb at 2 Mbps is another 500 ms: buffer drains 500, gains 1000.
        assert_eq!(obs.rebuf_ms, 0);
        assert_eq!(obs.players[0].buffer_ms, 3000 - 500 + 1000);
    }

    #[test]
    fn swipe_mid_step_moves_playback_to_the_prefetched_next_video() {
        // Slot 0 watched for 300 ms; during a 1000 ms download of slot 1's
        // first chunk the swipe fires at 300 ms and the new current video
        // stalls for the remaining 700 ms.
        let v0 = video("a", 3, [125_000; 3]);
        let v1 = video("b", 3, [250_000, 250_000, 250_000]);
        let mut session = Session::new(
            vec![v0, v1],
            net(2.0),
            &watches(&[300, 3000]),
            SessionConfig::default(),
        )
        .unwrap();
        // Put 1000 ms in slot 0's buffer first (500 ms download, stalls 500).
        session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        // Download slot 1 chunk 0: 2 Mb at 2 Mbps = 1000 ms.
        let obs = session
            .step(Decision::Download { slot: 1, level: Level::LOW })
            .unwrap();
        assert_eq!(obs.delay_ms, 1000);
        assert_eq!(obs.rebuf_ms, 700);
        assert_eq!(obs.play_video_id, 1);
        assert_eq!(obs.players[0].video_id, 1);
        assert_eq!(obs.players[0].buffer_ms, 1000);
    }

    #[test]
    fn chunk_completing_after_a_swipe_is_recorded_but_uncredited() {
        // Slot 0's watch point passes while its own chunk is in flight; the
        // bits are charged, the buffer credit has no player to land on.
        let v0 = video("a", 10, [125_000; 3]);
        let v1 = video("b", 3, [125_000; 3]);
        let mut session = Session::new(
            vec![v0, v1],
            net(2.0),
            &watches(&[400, 3000]),
            SessionConfig::default(),
        )
        .unwrap();
        session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        // Chunk 1 of video 0 downloads over 500 ms; watch point 400 is hit
        // mid-flight, swiping video 0 away before its own chunk lands.
        let obs = session
            .step(Decision::Download { slot: 0, level: Level::LOW })
            .unwrap();
        assert_eq!(obs.play_video_id, 1);
        let t = session.trajectory();
        assert_eq!(t.downloads.len(), 2);
        assert_eq!(t.downloads[1].video_id, 0);
        // Video 0 retired with exactly one credited chunk.
        assert_eq!(t.playback[0].levels.len(), 1);
        assert_eq!(t.playback[0].played_ms, 400);
    }

    #[test]
    fn sleep_lets_playback_run_without_downloads() {
        let mut session = Session::new(
            vec![video("v", 3, [125_000; 3])],
            net(2.0),
            &watches(&[2000]),
            SessionConfig::default(),
        )
        .unwrap();
        session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        let obs = session.step(Decision::Sleep { ms: 400 }).unwrap();
        assert_eq!(obs.video_size_bits, 0);
        assert_eq!(obs.rebuf_ms, 0);
        assert_eq!(obs.players[0].buffer_ms, 600);
        // Sleeping into an empty buffer rebuffers for the whole remainder.
        let obs = session.step(Decision::Sleep { ms: 1000 }).unwrap();
        assert_eq!(obs.rebuf_ms, 400);
    }

    #[test]
    fn decision_validation_errors() {
        let mut session = Session::new(
            vec![video("v", 1, [125_000; 3])],
            net(2.0),
            &watches(&[1000]),
            SessionConfig::default(),
        )
        .unwrap();
        assert_eq!(
            session.step(Decision::Sleep { ms: 0 }).unwrap_err(),
            EngineError::ZeroSleep
        );
        assert!(matches!(
            session
                .step(Decision::Download { slot: 3, level: Level::LOW })
                .unwrap_err(),
            EngineError::SlotOutOfWindow { slot: 3, occupancy: 1 }
        ));
        session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        assert!(matches!(
            session
                .step(Decision::Download { slot: 0, level: Level::LOW })
                .unwrap_err(),
            EngineError::VideoFullyDownloaded { video: 0 }
        ));
        // Drain playback to the end; further steps must be rejected.
        session.step(Decision::Sleep { ms: 1000 }).unwrap();
        assert!(session.ended());
        assert_eq!(
            session.step(Decision::Sleep { ms: 100 }).unwrap_err(),
            EngineError::SessionEnded
        );
    }

    #[test]
    fn ended_session_accounts_every_millisecond() {
        let mut session = Session::new(
            vec![video("v", 2, [125_000; 3])],
            net(2.0),
            &watches(&[1500]),
            SessionConfig::default(),
        )
        .unwrap();
        session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        session.step(Decision::Download { slot: 0, level: Level::LOW }).unwrap();
        // 1500 ms of content buffered; sleep far past the watch point. The
        // second download already played 500 ms, so 1000 ms remain before
        // the swipe and the last 3000 ms are post-session idle.
        let obs = session.step(Decision::Sleep { ms: 4000 }).unwrap();
        assert!(session.ended());
        let t = session.trajectory();
        let last = t.steps.last().unwrap();
        assert_eq!(last.idle_ms, 3000);
        assert_eq!(obs.delay_ms, 4000);
        assert_eq!(t.total_played_ms(), 1500);
        assert_eq!(session.clock_ms(), t.total_delay_ms());
    }

    /// Always sleeps a fixed amount.
    struct Sleeper(u64);

    impl Algorithm for Sleeper {
        fn name(&self) -> &str {
            "sleeper"
        }
        fn decide(&mut self, _obs: &Observation) -> Decision {
            Decision::Sleep { ms: self.0 }
        }
    }

    #[test]
    fn all_sleep_run_plays_exactly_the_watch_durations() {
        // With zero downloads nothing ever buffers, so every video stalls
        // until... nothing: playback cannot progress. Watch durations of 0
        // are the only way a pure sleeper terminates.
        let videos = vec![video("a", 2, [1000; 3]), video("b", 2, [1000; 3])];
        let mut session = Session::new(
            videos,
            net(2.0),
            &watches(&[0, 0]),
            SessionConfig::default(),
        )
        .unwrap();
        let t = run_session(&mut session, &mut Sleeper(1000)).unwrap();
        assert!(t.ended);
        assert_eq!(t.total_played_ms(), 0);
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn identical_runs_produce_identical_trajectories() {
        let build = || {
            Session::new(
                vec![video("a", 4, [100_000; 3]), video("b", 4, [100_000; 3])],
                net(1.3),
                &watches(&[2500, 1200]),
                SessionConfig::default(),
            )
            .unwrap()
        };
        struct Greedy;
        impl Algorithm for Greedy {
            fn name(&self) -> &str {
                "greedy"
            }
            fn decide(&mut self, obs: &Observation) -> Decision {
                for (slot, p) in obs.players.iter().enumerate() {
                    if p.downloaded_chunks < p.chunk_count {
                        return Decision::Download { slot, level: Level::LOW };
                    }
                }
                Decision::Sleep { ms: 500 }
            }
        }
        let a = run_session(&mut build(), &mut Greedy).unwrap();
        let b = run_session(&mut build(), &mut Greedy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn snapshots_never_leak_watch_durations() {
        let session = Session::new(
            vec![video("v", 2, [1000; 3])],
            net(2.0),
            &watches(&[777]),
            SessionConfig::default(),
        )
        .unwrap();
        let json = serde_json::to_string(&session.initial_observation()).unwrap();
        assert!(!json.contains("watch"), "observation leaked: {json}");
        assert!(!json.contains("777"), "observation leaked: {json}");
    }

    #[test]
    fn nonterminating_runs_hit_the_step_ceiling() {
        let mut session = Session::new(
            vec![video("v", 2, [1000; 3])],
            net(2.0),
            &watches(&[1500]),
            SessionConfig {
                max_steps: 10,
                ..Default::default()
            },
        )
        .unwrap();
        // A sleeper against a nonzero watch duration never progresses.
        let err = run_session(&mut session, &mut Sleeper(100)).unwrap_err();
        assert!(matches!(err, RunError::NonTerminating { max_steps: 10 }));
    }
}
