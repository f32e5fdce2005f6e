//! Trajectory files: JSON Lines with one self-describing record per line —
//! a leading `meta` record, one `step` record per simulator step, then the
//! `download` and `playback` ledgers scoring needs.

use super::trajectory::{DownloadRecord, PlaybackRecord, StepRecord, Trajectory};
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Write};

/// Run provenance carried at the head of a trajectory file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub algorithm: String,
    pub network: String,
    pub videos: Vec<String>,
    pub seed: u64,
    pub ended: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Meta(TrajectoryMeta),
    Step(StepRecord),
    Download(DownloadRecord),
    Playback(PlaybackRecord),
}

pub fn write_trajectory(
    mut out: impl Write,
    meta: &TrajectoryMeta,
    trajectory: &Trajectory,
) -> io::Result<()> {
    let mut emit = |line: &Line| -> io::Result<()> {
        serde_json::to_writer(&mut out, line)?;
        out.write_all(b"\n")
    };
    let mut meta = meta.clone();
    meta.ended = trajectory.ended;
    emit(&Line::Meta(meta))?;
    for step in &trajectory.steps {
        emit(&Line::Step(step.clone()))?;
    }
    for download in &trajectory.downloads {
        emit(&Line::Download(*download))?;
    }
    for playback in &trajectory.playback {
        emit(&Line::Playback(playback.clone()))?;
    }
    Ok(())
}

pub fn read_trajectory(input: impl BufRead) -> io::Result<(TrajectoryMeta, Trajectory)> {
    let mut meta = None;
    let mut trajectory = Trajectory {
        ended: false,
        steps: Vec::new(),
        downloads: Vec::new(),
        playback: Vec::new(),
    };
    for raw in input.lines() {
        let raw = raw?;
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(&raw)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        match line {
            Line::Meta(m) => {
                trajectory.ended = m.ended;
                meta = Some(m);
            }
            Line::Step(s) => trajectory.steps.push(s),
            Line::Download(d) => trajectory.downloads.push(d),
            Line::Playback(p) => trajectory.playback.push(p),
        }
    }
    let meta = meta.ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidData, "trajectory file has no meta record")
    })?;
    Ok((meta, trajectory))
}
