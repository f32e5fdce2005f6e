//! Video assets: per-chunk size tables across the bitrate ladder, plus the
//! JSON manifest binding videos to their size files and retention curves.

use super::retention_curve::parse_retention_trace;
use super::{Result, RetentionCurve, TraceError};
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Number of rungs in the bitrate ladder.
pub const LEVELS: usize = 3;

/// Default ladder, in kbps.
pub const DEFAULT_LADDER_KBPS: [u32; LEVELS] = [750, 1200, 1850];

/// Default chunk playback duration.
pub const DEFAULT_CHUNK_MS: u64 = 1000;

/// One short video: chunk sizes per ladder level and its retention curve.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoAsset {
    name: String,
    chunk_duration_ms: u64,
    last_chunk_ms: u64,
    /// `sizes_bytes[chunk][level]`.
    sizes_bytes: Vec<[u64; LEVELS]>,
    ladder_kbps: [u32; LEVELS],
    retention: RetentionCurve,
}

impl VideoAsset {
    pub fn new(
        name: impl Into<String>,
        sizes_bytes: Vec<[u64; LEVELS]>,
        ladder_kbps: [u32; LEVELS],
        retention: RetentionCurve,
    ) -> Result<Self> {
        Self::with_durations(name, sizes_bytes, ladder_kbps, retention, DEFAULT_CHUNK_MS, None)
    }

    /// `total_duration_ms`, when given, shortens the final chunk; it must land
    /// within the last chunk's span.
    pub fn with_durations(
        name: impl Into<String>,
        sizes_bytes: Vec<[u64; LEVELS]>,
        ladder_kbps: [u32; LEVELS],
        retention: RetentionCurve,
        chunk_duration_ms: u64,
        total_duration_ms: Option<u64>,
    ) -> Result<Self> {
        let name = name.into();
        if sizes_bytes.is_empty() {
            return Err(TraceError::InvalidVideo(format!("{name}: no chunks")));
        }
        if chunk_duration_ms == 0 {
            return Err(TraceError::InvalidVideo(format!(
                "{name}: chunk duration must be > 0"
            )));
        }
        if sizes_bytes.iter().any(|row| row.iter().any(|&b| b == 0)) {
            return Err(TraceError::InvalidVideo(format!(
                "{name}: chunk sizes must be > 0"
            )));
        }
        if !(ladder_kbps[0] > 0 && ladder_kbps.windows(2).all(|w| w[0] < w[1])) {
            return Err(TraceError::InvalidVideo(format!(
                "{name}: ladder must be strictly increasing"
            )));
        }
        let n = sizes_bytes.len() as u64;
        let last_chunk_ms = match total_duration_ms {
            None => chunk_duration_ms,
            Some(total) => {
                let head = (n - 1) * chunk_duration_ms;
                if total <= head || total > head + chunk_duration_ms {
                    return Err(TraceError::InvalidVideo(format!(
                        "{name}: duration {total} ms does not fit {n} chunks of {chunk_duration_ms} ms"
                    )));
                }
                total - head
            }
        };
        Ok(Self {
            name,
            chunk_duration_ms,
            last_chunk_ms,
            sizes_bytes,
            ladder_kbps,
            retention,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chunk_count(&self) -> usize {
        self.sizes_bytes.len()
    }

    pub fn chunk_duration_ms(&self) -> u64 {
        self.chunk_duration_ms
    }

    /// Playback duration of a specific chunk (only the last may be shorter).
    pub fn chunk_duration_at(&self, chunk: usize) -> u64 {
        if chunk + 1 == self.chunk_count() {
            self.last_chunk_ms
        } else {
            self.chunk_duration_ms
        }
    }

    pub fn duration_ms(&self) -> u64 {
        (self.chunk_count() as u64 - 1) * self.chunk_duration_ms + self.last_chunk_ms
    }

    pub fn size_bytes(&self, chunk: usize, level: usize) -> u64 {
        self.sizes_bytes[chunk][level]
    }

    /// Transfer size of a chunk, in bits.
    pub fn size_bits(&self, chunk: usize, level: usize) -> u64 {
        self.sizes_bytes[chunk][level] * 8
    }

    /// Sizes of one chunk across all levels, in bits.
    pub fn chunk_bits(&self, chunk: usize) -> [u64; LEVELS] {
        let row = self.sizes_bytes[chunk];
        [row[0] * 8, row[1] * 8, row[2] * 8]
    }

    pub fn ladder_kbps(&self) -> [u32; LEVELS] {
        self.ladder_kbps
    }

    /// Nominal rate of a ladder level, in Mbps.
    pub fn level_mbps(&self, level: usize) -> f64 {
        self.ladder_kbps[level] as f64 / 1000.0
    }

    pub fn retention(&self) -> &RetentionCurve {
        &self.retention
    }

    /// Size-file content for one level: one integer (bytes) per line.
    pub fn serialize_level(&self, level: usize) -> String {
        let mut out = String::new();
        for row in &self.sizes_bytes {
            out.push_str(&format!("{}\n", row[level]));
        }
        out
    }
}

/// Parses one size stream per ladder level (ordered low to high). Each line
/// holds the byte size of one chunk; all streams must have equal line counts.
pub fn parse_video_trace<R: BufRead>(
    streams: [R; LEVELS],
    name: impl Into<String>,
    retention: RetentionCurve,
) -> Result<VideoAsset> {
    let mut columns: Vec<Vec<u64>> = Vec::with_capacity(LEVELS);
    for (level, stream) in streams.into_iter().enumerate() {
        let mut sizes = Vec::new();
        for (lineno, line) in stream.lines().enumerate() {
            let line_no = lineno + 1;
            let raw = line?;
            let text = raw.trim();
            if text.is_empty() {
                continue;
            }
            let bytes: u64 = text.parse().map_err(|_| TraceError::MalformedLine {
                line: line_no,
                reason: format!("level {level}: bad chunk size {text:?}"),
            })?;
            if bytes == 0 {
                return Err(TraceError::NonPositiveSize {
                    level,
                    line: line_no,
                });
            }
            sizes.push(bytes);
        }
        columns.push(sizes);
    }
    let counts: Vec<usize> = columns.iter().map(Vec::len).collect();
    if counts.iter().any(|&c| c != counts[0]) {
        return Err(TraceError::UnequalChunkCounts { counts });
    }
    if counts[0] == 0 {
        return Err(TraceError::EmptyTrace);
    }
    let sizes_bytes = (0..counts[0])
        .map(|i| [columns[0][i], columns[1][i], columns[2][i]])
        .collect();
    VideoAsset::new(name, sizes_bytes, DEFAULT_LADDER_KBPS, retention)
}

/// JSON manifest binding video names to their on-disk trace files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub videos: Vec<ManifestVideo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestVideo {
    pub name: String,
    pub duration_ms: u64,
    #[serde(default = "default_chunk_ms")]
    pub chunk_duration_ms: u64,
    /// One file per ladder level, low to high, relative to the manifest.
    pub size_files: Vec<String>,
    pub retention_file: String,
    #[serde(default = "default_ladder")]
    pub bitrate_ladder_kbps: [u32; LEVELS],
}

fn default_chunk_ms() -> u64 {
    DEFAULT_CHUNK_MS
}

fn default_ladder() -> [u32; LEVELS] {
    DEFAULT_LADDER_KBPS
}

/// Loads a manifest and every asset it references. Paths are resolved
/// relative to the manifest file.
pub fn load_manifest(path: &Path) -> Result<Vec<Arc<VideoAsset>>> {
    let text = std::fs::read_to_string(path)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| TraceError::Manifest(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut assets = Vec::with_capacity(manifest.videos.len());
    for entry in &manifest.videos {
        if entry.size_files.len() != LEVELS {
            return Err(TraceError::Manifest(format!(
                "{}: expected {LEVELS} size files, got {}",
                entry.name,
                entry.size_files.len()
            )));
        }
        let mut columns = Vec::with_capacity(LEVELS);
        for file in &entry.size_files {
            let text = std::fs::read_to_string(base.join(file))?;
            let sizes: Vec<u64> = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    l.trim().parse::<u64>().map_err(|_| TraceError::MalformedLine {
                        line: i + 1,
                        reason: format!("{file}: bad chunk size {:?}", l.trim()),
                    })
                })
                .collect::<Result<_>>()?;
            columns.push(sizes);
        }
        let counts: Vec<usize> = columns.iter().map(Vec::len).collect();
        if counts.iter().any(|&c| c != counts[0]) || counts[0] == 0 {
            return Err(TraceError::UnequalChunkCounts { counts });
        }
        let retention_text = std::fs::read_to_string(base.join(&entry.retention_file))?;
        let retention = parse_retention_trace(&retention_text)?;
        let sizes_bytes = (0..counts[0])
            .map(|i| [columns[0][i], columns[1][i], columns[2][i]])
            .collect();
        assets.push(Arc::new(VideoAsset::with_durations(
            entry.name.clone(),
            sizes_bytes,
            entry.bitrate_ladder_kbps,
            retention,
            entry.chunk_duration_ms,
            Some(entry.duration_ms),
        )?));
    }
    Ok(assets)
}

/// Writes a set of assets as a manifest plus its referenced trace files.
pub fn write_manifest(dir: &Path, assets: &[Arc<VideoAsset>]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut videos = Vec::with_capacity(assets.len());
    for asset in assets {
        let mut size_files = Vec::with_capacity(LEVELS);
        for level in 0..LEVELS {
            let file = format!("{}_{}.txt", asset.name(), asset.ladder_kbps()[level]);
            std::fs::write(dir.join(&file), asset.serialize_level(level))?;
            size_files.push(file);
        }
        let retention_file = format!("{}_retention.txt", asset.name());
        std::fs::write(dir.join(&retention_file), asset.retention().serialize())?;
        videos.push(ManifestVideo {
            name: asset.name().to_string(),
            duration_ms: asset.duration_ms(),
            chunk_duration_ms: asset.chunk_duration_ms(),
            size_files,
            retention_file,
            bitrate_ladder_kbps: asset.ladder_kbps(),
        });
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&Manifest { videos })
        .expect("manifest serialization cannot fail");
    std::fs::write(&path, json + "\n")?;
    Ok(path)
}
