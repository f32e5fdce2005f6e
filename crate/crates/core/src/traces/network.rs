//! Network throughput traces and bandwidth-integration queries.
//!
//! A trace is a piecewise-constant throughput signal: each sample's value
//! holds from its timestamp until the next one, the final sample holds for
//! the same duration as the interval preceding it, and the signal then loops.
//! Time is quantized to integer milliseconds and throughput to integer bits
//! per second at parse time, so every bandwidth integral is computed in exact
//! integer arithmetic.

use super::{Result, TraceError};

/// Capacity unit used for integrals: 1 unit = 1 bps sustained for 1 ms,
/// i.e. one millibit. `size_bits * 1000` converts a chunk size into it.
type Millibits = u128;

const BPS_PER_MBPS: f64 = 1_000_000.0;
/// Parser bound on a single sample (10 Tbps); keeps integer math overflow-free.
const MAX_RATE_BPS: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Point {
    time_ms: u64,
    rate_bps: u64,
}

/// A validated, loopable network throughput trace.
#[derive(Debug, Clone)]
pub struct NetworkTrace {
    id: String,
    points: Vec<Point>,
    /// Duration of the final segment (equals the preceding sample interval).
    tail_ms: u64,
    /// Cumulative capacity up to the start of each segment, plus one final
    /// entry holding the full-period capacity.
    prefix_cap: Vec<Millibits>,
}

impl NetworkTrace {
    /// Builds a trace from `(seconds, Mbps)` samples, normalizing timestamps
    /// so the first sample sits at t = 0.
    pub fn from_points(id: impl Into<String>, samples: &[(f64, f64)]) -> Result<Self> {
        let quantized: Vec<(u64, u64)> = samples
            .iter()
            .enumerate()
            .map(|(i, &(sec, mbps))| quantize_sample(i + 1, sec, mbps, samples[0].0))
            .collect::<Result<_>>()?;
        Self::from_quantized(id.into(), quantized)
    }

    fn from_quantized(id: String, samples: Vec<(u64, u64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(TraceError::EmptyTrace);
        }
        let points: Vec<Point> = samples
            .into_iter()
            .map(|(time_ms, rate_bps)| Point { time_ms, rate_bps })
            .collect();
        let n = points.len();
        let tail_ms = points[n - 1].time_ms - points[n - 2].time_ms;
        let mut prefix_cap = Vec::with_capacity(n + 1);
        let mut acc: Millibits = 0;
        for i in 0..n {
            prefix_cap.push(acc);
            let dur = if i + 1 < n {
                points[i + 1].time_ms - points[i].time_ms
            } else {
                tail_ms
            };
            acc += dur as Millibits * points[i].rate_bps as Millibits;
        }
        prefix_cap.push(acc);
        Ok(Self {
            id,
            points,
            tail_ms,
            prefix_cap,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Returns a copy of the trace under a new id.
    pub fn with_id(&self, id: impl Into<String>) -> Self {
        let mut t = self.clone();
        t.id = id.into();
        t
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One loop of the signal, in milliseconds.
    pub fn period_ms(&self) -> u64 {
        self.points[self.points.len() - 1].time_ms + self.tail_ms
    }

    /// Capacity of one full loop, in millibits.
    fn period_cap(&self) -> Millibits {
        *self.prefix_cap.last().unwrap()
    }

    /// Sample points as `(seconds, Mbps)`.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .map(|p| (p.time_ms as f64 / 1000.0, p.rate_bps as f64 / BPS_PER_MBPS))
    }

    /// Throughput in effect at an absolute time, in Mbps.
    pub fn rate_at_mbps(&self, time_ms: u64) -> f64 {
        let rem = time_ms % self.period_ms();
        let idx = match self.points.binary_search_by_key(&rem, |p| p.time_ms) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.points[idx].rate_bps as f64 / BPS_PER_MBPS
    }

    /// Cumulative capacity delivered over `[0, time_ms)`, in millibits.
    fn cum(&self, time_ms: u64) -> Millibits {
        let period = self.period_ms() as Millibits;
        let whole = time_ms as Millibits / period;
        let rem = (time_ms as Millibits % period) as u64;
        whole * self.period_cap() + self.partial(rem)
    }

    /// Capacity over `[0, rem)` for `rem` within one period.
    fn partial(&self, rem: u64) -> Millibits {
        let idx = match self.points.binary_search_by_key(&rem, |p| p.time_ms) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let seg = &self.points[idx];
        self.prefix_cap[idx] + (rem - seg.time_ms) as Millibits * seg.rate_bps as Millibits
    }

    /// Exact bandwidth integral over `[start_ms, end_ms)`, in bits
    /// (rounded down to whole bits).
    pub fn integral_bits(&self, start_ms: u64, end_ms: u64) -> u64 {
        assert!(end_ms >= start_ms);
        ((self.cum(end_ms) - self.cum(start_ms)) / 1000) as u64
    }

    /// Smallest integer `t` (ms) such that the capacity delivered over
    /// `[start_ms, start_ms + t)` reaches `size_bits`. The trace loops, so
    /// every request is satisfiable.
    pub fn download_time(&self, start_ms: u64, size_bits: u64) -> u64 {
        assert!(size_bits > 0, "download size must be > 0");
        let target = self.cum(start_ms) + size_bits as Millibits * 1000;
        self.earliest_reach(target) - start_ms
    }

    /// Smallest `T` with `cum(T) >= target`.
    fn earliest_reach(&self, target: Millibits) -> u64 {
        let pcap = self.period_cap();
        let mut whole = target / pcap;
        let mut rem = target % pcap;
        if rem == 0 {
            // Land exactly on a period boundary; the previous period's final
            // millisecond already delivers the target.
            if whole == 0 {
                return 0;
            }
            whole -= 1;
            rem = pcap;
        }
        // Find the segment where the running capacity reaches `rem`.
        let idx = match self.prefix_cap.binary_search(&rem) {
            Ok(i) => i - 1,
            Err(i) => i - 1,
        };
        let seg = &self.points[idx];
        let need = rem - self.prefix_cap[idx];
        let ms = need.div_ceil(seg.rate_bps as Millibits) as u64;
        whole as u64 * self.period_ms() + seg.time_ms + ms
    }

    /// Category by time-weighted mean throughput over one loop.
    pub fn classify(&self, thresholds: CategoryThresholds) -> TraceCategory {
        let mean_mbps =
            self.period_cap() as f64 / self.period_ms() as f64 / BPS_PER_MBPS;
        if mean_mbps < thresholds.low_cut_mbps {
            TraceCategory::Low
        } else if mean_mbps >= thresholds.high_cut_mbps {
            TraceCategory::High
        } else {
            TraceCategory::Medium
        }
    }

    /// One `<seconds> <Mbps>` record per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (sec, mbps) in self.points() {
            out.push_str(&format!("{} {}\n", sec, mbps));
        }
        out
    }
}

fn quantize_sample(line: usize, sec: f64, mbps: f64, origin_sec: f64) -> Result<(u64, u64)> {
    if !sec.is_finite() {
        return Err(TraceError::MalformedLine {
            line,
            reason: "timestamp is not a finite number".into(),
        });
    }
    if !mbps.is_finite() {
        return Err(TraceError::MalformedLine {
            line,
            reason: "throughput is not a finite number".into(),
        });
    }
    if mbps <= 0.0 {
        return Err(TraceError::NonPositiveThroughput { line });
    }
    let rate_bps = (mbps * BPS_PER_MBPS).round();
    if rate_bps <= 0.0 {
        return Err(TraceError::NonPositiveThroughput { line });
    }
    if rate_bps > MAX_RATE_BPS {
        return Err(TraceError::MalformedLine {
            line,
            reason: "throughput exceeds the supported range".into(),
        });
    }
    let rel_ms = ((sec - origin_sec) * 1000.0).round();
    if rel_ms < 0.0 {
        return Err(TraceError::NonMonotonicTimestamp { line });
    }
    if rel_ms > 4.0e15 {
        return Err(TraceError::MalformedLine {
            line,
            reason: "timestamp exceeds the supported range".into(),
        });
    }
    Ok((rel_ms as u64, rate_bps as u64))
}

/// Parses the `<seconds> <Mbps>` text format. Fields split on arbitrary
/// whitespace, blank lines are ignored, and timestamps are normalized so the
/// trace starts at t = 0.
pub fn parse_network_trace(text: &str, id: impl Into<String>) -> Result<NetworkTrace> {
    let mut origin: Option<f64> = None;
    let mut prev_ms: Option<u64> = None;
    let mut samples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut fields = raw.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            if raw.trim().is_empty() {
                continue;
            }
            return Err(TraceError::MalformedLine {
                line,
                reason: "expected two fields".into(),
            });
        };
        if fields.next().is_some() {
            return Err(TraceError::MalformedLine {
                line,
                reason: "expected exactly two fields".into(),
            });
        }
        let sec: f64 = a.parse().map_err(|_| TraceError::MalformedLine {
            line,
            reason: format!("bad timestamp {a:?}"),
        })?;
        let mbps: f64 = b.parse().map_err(|_| TraceError::MalformedLine {
            line,
            reason: format!("bad throughput {b:?}"),
        })?;
        let origin = *origin.get_or_insert(sec);
        let (time_ms, rate_bps) = quantize_sample(line, sec, mbps, origin)?;
        if let Some(prev) = prev_ms {
            if time_ms <= prev {
                return Err(TraceError::NonMonotonicTimestamp { line });
            }
        }
        prev_ms = Some(time_ms);
        samples.push((time_ms, rate_bps));
    }
    NetworkTrace::from_quantized(id.into(), samples)
}

/// Throughput class of a trace, split by time-weighted mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TraceCategory {
    Low,
    Medium,
    High,
}

impl std::fmt::Display for TraceCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceCategory::Low => write!(f, "low"),
            TraceCategory::Medium => write!(f, "medium"),
            TraceCategory::High => write!(f, "high"),
        }
    }
}

/// Mean-throughput cuts (Mbps) separating Low/Medium/High traces.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CategoryThresholds {
    pub low_cut_mbps: f64,
    pub high_cut_mbps: f64,
}

impl CategoryThresholds {
    /// Boundaries used for the public synthetic traces.
    pub const PUBLIC: Self = Self {
        low_cut_mbps: 1.5,
        high_cut_mbps: 3.0,
    };
    /// Boundaries used for the held-out evaluation traces.
    pub const EVALUATION: Self = Self {
        low_cut_mbps: 1.9,
        high_cut_mbps: 3.0,
    };

    pub fn new(low_cut_mbps: f64, high_cut_mbps: f64) -> Result<Self> {
        if !(low_cut_mbps.is_finite() && high_cut_mbps.is_finite() && low_cut_mbps < high_cut_mbps)
        {
            return Err(TraceError::InvalidParams(
                "thresholds must be finite with low < high".into(),
            ));
        }
        Ok(Self {
            low_cut_mbps,
            high_cut_mbps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(mbps: f64) -> NetworkTrace {
        NetworkTrace::from_points("c", &[(0.0, mbps), (1.0, mbps)]).unwrap()
    }

    #[test]
    fn parses_the_two_column_format() {
        let t = parse_network_trace("0.0 2.5\n1.0 3.1\n", "t").unwrap();
        let pts: Vec<_> = t.points().collect();
        assert_eq!(pts, vec![(0.0, 2.5), (1.0, 3.1)]);
    }

    #[test]
    fn rejects_non_positive_throughput() {
        let err = parse_network_trace("0.0 2.5\n0.5 -1\n", "t").unwrap_err();
        assert!(matches!(err, TraceError::NonPositiveThroughput { line: 2 }));
    }

    #[test]
    fn rejects_single_point_traces() {
        let err = parse_network_trace("1.0 2.0\n", "t").unwrap_err();
        assert!(matches!(err, TraceError::EmptyTrace));
    }

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(
            parse_network_trace("", "t").unwrap_err(),
            TraceError::EmptyTrace
        ));
        assert!(matches!(
            parse_network_trace("\n \n", "t").unwrap_err(),
            TraceError::EmptyTrace
        ));
    }

    #[test]
    fn rejects_non_monotonic_timestamps() {
        let err = parse_network_trace("0 1\n2 1\n1 1\n", "t").unwrap_err();
        assert!(matches!(err, TraceError::NonMonotonicTimestamp { line: 3 }));
    }

    #[test]
    fn rejects_malformed_lines_with_line_number() {
        let err = parse_network_trace("0 1\nbogus 2\n", "t").unwrap_err();
        assert!(matches!(err, TraceError::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn normalizes_timestamps_to_zero_origin() {
        let t = parse_network_trace("5.0 1.0\n6.5 2.0\n", "t").unwrap();
        let pts: Vec<_> = t.points().collect();
        assert_eq!(pts, vec![(0.0, 1.0), (1.5, 2.0)]);
    }

    #[test]
    fn ignores_blank_lines_and_extra_whitespace() {
        let t = parse_network_trace("\n0.0   2.5\n\n  1.0\t3.1  \n\n", "t").unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn download_time_constant_rate() {
        // 1 Mb at 2 Mbps is half a second.
        let t = constant(2.0);
        assert_eq!(t.download_time(0, 1_000_000), 500);
    }

    #[test]
    fn download_time_crosses_segments_and_rounds_up() {
        let t = NetworkTrace::from_points("t", &[(0.0, 1.0), (1.0, 3.0)]).unwrap();
        // 1 Mb over the first second, then 1 Mb at 3 Mbps: 333.3 ms, up to 334.
        assert_eq!(t.download_time(0, 2_000_000), 1334);
    }

    #[test]
    fn download_time_wraps_past_the_tail() {
        let t = NetworkTrace::from_points("t", &[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        // Period 2 s at 1 Mbps; 5 Mb needs 5 s regardless of where it starts.
        assert_eq!(t.download_time(0, 5_000_000), 5000);
        assert_eq!(t.download_time(1700, 5_000_000), 5000);
    }

    #[test]
    fn tail_segment_lasts_as_long_as_the_preceding_interval() {
        let t = NetworkTrace::from_points("t", &[(0.0, 1.0), (10.0, 5.0)]).unwrap();
        assert_eq!(t.period_ms(), 20_000);
        assert_eq!(t.integral_bits(0, 20_000), 60_000_000);
    }

    #[test]
    fn classify_by_time_weighted_mean() {
        let th = CategoryThresholds::PUBLIC;
        assert_eq!(constant(1.0).classify(th), TraceCategory::Low);
        let eval = CategoryThresholds::EVALUATION;
        assert_eq!(constant(2.0).classify(eval), TraceCategory::Medium);
        // Mean (1*10 + 5*10)/20 = 3.0 lands exactly on the high cut.
        let t = NetworkTrace::from_points("t", &[(0.0, 1.0), (10.0, 5.0)]).unwrap();
        assert_eq!(t.classify(th), TraceCategory::High);
    }

    #[test]
    fn classify_ignores_id_and_textual_tail() {
        let text = "0 0.8\n1 2.2\n2 1.4\n";
        let a = parse_network_trace(text, "a").unwrap();
        let b = parse_network_trace(&format!("{text}\n   \n"), "renamed").unwrap();
        let th = CategoryThresholds::PUBLIC;
        assert_eq!(a.classify(th), b.classify(th));
    }

    #[test]
    fn serialize_round_trips() {
        let text = "0 0.3\n0.5 2.5\n1.75 0.9298\n";
        let a = parse_network_trace(text, "t").unwrap();
        let b = parse_network_trace(&a.serialize(), "t").unwrap();
        let av: Vec<_> = a.points().collect();
        let bv: Vec<_> = b.points().collect();
        assert_eq!(av, bv);
    }

    #[test]
    fn thresholds_require_low_below_high() {
        assert!(CategoryThresholds::new(3.0, 1.5).is_err());
        assert!(CategoryThresholds::new(1.5, 3.0).is_ok());
    }
}
