//! Seeded synthetic network traces.
//!
//! A hidden-state process drives the signal: each state draws a mean
//! throughput uniformly from `[min_bw, max_bw]` and persists for a
//! geometrically distributed number of seconds; every emitted second adds
//! Gaussian noise and clamps back into the band.

use super::network::NetworkTrace;
use super::{Result, TraceError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal, Uniform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTraceParams {
    pub min_bw_mbps: f64,
    pub max_bw_mbps: f64,
    /// Mean sojourn time of one hidden state, in seconds (>= 1).
    pub mean_state_duration_s: f64,
    pub noise_std_mbps: f64,
    /// Trace length in seconds (>= 10): one sample per second.
    pub length_s: u32,
    pub seed: u64,
}

impl Default for SyntheticTraceParams {
    fn default() -> Self {
        Self {
            min_bw_mbps: 0.2,
            max_bw_mbps: 4.3,
            mean_state_duration_s: 5.0,
            noise_std_mbps: 0.3,
            length_s: 300,
            seed: 0,
        }
    }
}

impl SyntheticTraceParams {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(TraceError::InvalidParams(msg.into()));
        if !(self.min_bw_mbps.is_finite() && self.max_bw_mbps.is_finite()) {
            return bad("bandwidth bounds must be finite");
        }
        if self.min_bw_mbps <= 0.0 {
            return bad("min_bw must be > 0");
        }
        if self.max_bw_mbps < self.min_bw_mbps {
            return bad("max_bw must be >= min_bw");
        }
        if !(self.mean_state_duration_s.is_finite() && self.mean_state_duration_s >= 1.0) {
            return bad("mean state duration must be >= 1 s");
        }
        if !(self.noise_std_mbps.is_finite() && self.noise_std_mbps >= 0.0) {
            return bad("noise std must be >= 0");
        }
        if self.length_s < 10 {
            return bad("length must be >= 10 s");
        }
        Ok(())
    }
}

/// Generates a trace with one sample per second. Deterministic in the seed.
pub fn generate_synthetic_trace(params: &SyntheticTraceParams) -> Result<NetworkTrace> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mean_dist = Uniform::new_inclusive(params.min_bw_mbps, params.max_bw_mbps)
        .map_err(|e| TraceError::InvalidParams(e.to_string()))?;
    let noise = if params.noise_std_mbps > 0.0 {
        Some(
            Normal::new(0.0, params.noise_std_mbps)
                .map_err(|e| TraceError::InvalidParams(e.to_string()))?,
        )
    } else {
        None
    };
    // 1 + Geometric(p) has mean 1/p, so p = 1 / mean sojourn.
    let sojourn = Geometric::new(1.0 / params.mean_state_duration_s)
        .map_err(|e| TraceError::InvalidParams(e.to_string()))?;

    let mut samples = Vec::with_capacity(params.length_s as usize);
    let mut state_mean = 0.0;
    let mut state_left = 0u64;
    for second in 0..params.length_s {
        if state_left == 0 {
            state_mean = mean_dist.sample(&mut rng);
            state_left = 1 + sojourn.sample(&mut rng);
        }
        state_left -= 1;
        let mut value = state_mean;
        if let Some(noise) = &noise {
            value += noise.sample(&mut rng);
        }
        value = value.clamp(params.min_bw_mbps, params.max_bw_mbps);
        samples.push((second as f64, value));
    }
    NetworkTrace::from_points(format!("synthetic-{}", params.seed), &samples)
}
