//! Chunk-level bandwidth estimators fed by (size, delay) download samples.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("no throughput samples yet")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    Harmonic,
    MovingAverage,
}

/// An estimate together with how it was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthEstimate {
    pub mbps: f64,
    pub method: EstimateMethod,
    /// Samples actually used.
    pub window: usize,
}

fn rate_mbps(size_bits: u64, delay_ms: u64) -> f64 {
    size_bits as f64 / (delay_ms as f64 * 1000.0)
}

/// Harmonic mean of the last `window` per-chunk rates:
/// `W / sum(1 / r_i)` in Mbps. Samples are `(size bits, delay ms)`.
pub fn harmonic_estimate(
    samples: &[(u64, u64)],
    window: usize,
) -> Result<f64, EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::NoSamples);
    }
    let used = window.min(samples.len()).max(1);
    let tail = &samples[samples.len() - used..];
    let inv_sum: f64 = tail
        .iter()
        .map(|&(bits, ms)| 1.0 / rate_mbps(bits, ms))
        .sum();
    Ok(used as f64 / inv_sum)
}

/// Arithmetic mean of the last `window` per-chunk rates, in Mbps.
pub fn moving_average_estimate(
    samples: &[(u64, u64)],
    window: usize,
) -> Result<f64, EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::NoSamples);
    }
    let used = window.min(samples.len()).max(1);
    let tail = &samples[samples.len() - used..];
    let sum: f64 = tail.iter().map(|&(bits, ms)| rate_mbps(bits, ms)).sum();
    Ok(sum / used as f64)
}

/// Rolling download history with a fixed capacity.
#[derive(Debug, Clone)]
pub struct ThroughputHistory {
    samples: VecDeque<(u64, u64)>,
    capacity: usize,
}

impl ThroughputHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            samples: VecDeque::with_capacity(capacity.max(1)),
            capacity: capacity.max(1),
        }
    }

    /// Records the download sample of an observation; sleeps (zero size or
    /// zero delay) carry no signal and are skipped.
    pub fn record(&mut self, size_bits: u64, delay_ms: u64) {
        if size_bits == 0 || delay_ms == 0 {
            return;
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((size_bits, delay_ms));
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn contiguous(&self) -> Vec<(u64, u64)> {
        self.samples.iter().copied().collect()
    }

    pub fn estimate(&self, method: EstimateMethod) -> Result<BandwidthEstimate, EstimatorError> {
        let samples = self.contiguous();
        let window = self.capacity;
        let mbps = match method {
            EstimateMethod::Harmonic => harmonic_estimate(&samples, window)?,
            EstimateMethod::MovingAverage => moving_average_estimate(&samples, window)?,
        };
        Ok(BandwidthEstimate {
            mbps,
            method,
            window: window.min(samples.len()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1 Mbps for `r` gives samples of r Mb over 1000 ms.
    fn samples(rates: &[f64]) -> Vec<(u64, u64)> {
        rates
            .iter()
            .map(|r| ((r * 1e6) as u64, 1000))
            .collect()
    }

    #[test]
    fn harmonic_of_constant_rates_is_the_rate() {
        let s = samples(&[2.0, 2.0, 2.0]);
        assert!((harmonic_estimate(&s, 3).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_of_one_and_three_is_one_point_five() {
        let s = samples(&[1.0, 3.0]);
        assert!((harmonic_estimate(&s, 5).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn single_sample_estimates_are_the_sample() {
        let s = samples(&[4.0]);
        assert!((harmonic_estimate(&s, 5).unwrap() - 4.0).abs() < 1e-12);
        assert!((moving_average_estimate(&s, 1).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn moving_average_uses_only_the_window_tail() {
        let s = samples(&[1.0, 3.0]);
        assert!((moving_average_estimate(&s, 2).unwrap() - 2.0).abs() < 1e-12);
        let s = samples(&[1.0, 3.0, 5.0]);
        assert!((moving_average_estimate(&s, 2).unwrap() - 4.0).abs() < 1e-12);
        assert!((moving_average_estimate(&s, 1).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn empty_history_is_an_error() {
        assert_eq!(harmonic_estimate(&[], 5), Err(EstimatorError::NoSamples));
        assert_eq!(
            moving_average_estimate(&[], 5),
            Err(EstimatorError::NoSamples)
        );
    }

    #[test]
    fn history_drops_the_oldest_sample_past_capacity() {
        let mut h = ThroughputHistory::new(2);
        h.record(1_000_000, 1000);
        h.record(3_000_000, 1000);
        h.record(5_000_000, 1000);
        let est = h.estimate(EstimateMethod::MovingAverage).unwrap();
        assert!((est.mbps - 4.0).abs() < 1e-12);
        assert_eq!(est.window, 2);
    }

    #[test]
    fn history_ignores_sleep_observations() {
        let mut h = ThroughputHistory::new(4);
        h.record(0, 500);
        assert!(h.is_empty());
    }
}
