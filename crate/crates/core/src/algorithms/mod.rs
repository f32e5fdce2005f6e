//! The algorithm-author SDK: the decision interface, bandwidth estimators,
//! the baseline policy families, and a name-based registry.

mod baselines;
mod estimators;
mod oracle;

pub use baselines::{FixedPrefetch, NoPrefetch, ThresholdHeuristic};
pub use estimators::{
    harmonic_estimate, moving_average_estimate, BandwidthEstimate, EstimateMethod, EstimatorError,
    ThroughputHistory,
};
pub use oracle::OracleAlgorithm;

use crate::engine::{Decision, Observation, WINDOW_SIZE};
use crate::traces::LEVELS;
use std::collections::BTreeMap;

/// Static facts handed to an algorithm before its first decision.
#[derive(Debug, Clone)]
pub struct AlgorithmContext {
    pub window_size: usize,
    /// Nominal ladder rates, in kbps.
    pub ladder_kbps: [u32; LEVELS],
    /// Free-form per-algorithm parameters from the config file.
    pub params: BTreeMap<String, String>,
}

impl Default for AlgorithmContext {
    fn default() -> Self {
        Self {
            window_size: WINDOW_SIZE,
            ladder_kbps: [750, 1200, 1850],
            params: BTreeMap::new(),
        }
    }
}

impl AlgorithmContext {
    pub fn with_params<I, K, V>(params: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            params: params
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            ..Self::default()
        }
    }

    pub fn param_f64(&self, key: &str, default: f64) -> f64 {
        self.params
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    }

    pub fn param_u64(&self, key: &str, default: u64) -> u64 {
        self.params
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    }

    pub fn param_usize(&self, key: &str, default: usize) -> usize {
        self.params
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    }
}

/// A prefetch policy. One instance drives exactly one session; instances own
/// their mutable state and may move between worker threads only between
/// `decide` calls.
pub trait Algorithm: Send {
    fn name(&self) -> &str;

    /// Called once before the first observation.
    fn initialize(&mut self, _ctx: &AlgorithmContext) {}

    /// Must return a decision valid for the presented window.
    fn decide(&mut self, observation: &Observation) -> Decision;
}

type Factory = Box<dyn Fn(&AlgorithmContext) -> Box<dyn Algorithm> + Send + Sync>;

/// Name-based construction of algorithms; the extension point for
/// third-party policies.
pub struct AlgorithmRegistry {
    factories: BTreeMap<String, Factory>,
}

impl AlgorithmRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry preloaded with the built-in baselines.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register("no_prefetch", |ctx| Box::new(NoPrefetch::from_context(ctx)));
        registry.register("fixed_prefetch", |ctx| {
            Box::new(FixedPrefetch::from_context(ctx))
        });
        registry.register("threshold", |ctx| {
            Box::new(ThresholdHeuristic::from_context(ctx))
        });
        registry
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        factory: impl Fn(&AlgorithmContext) -> Box<dyn Algorithm> + Send + Sync + 'static,
    ) {
        self.factories.insert(name.into(), Box::new(factory));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    /// Builds and initializes a fresh instance.
    pub fn create(&self, name: &str, ctx: &AlgorithmContext) -> Option<Box<dyn Algorithm>> {
        let factory = self.factories.get(name)?;
        let mut algorithm = factory(ctx);
        algorithm.initialize(ctx);
        Some(algorithm)
    }
}

/// Highest ladder level whose nominal rate fits under the estimate (scaled
/// by a safety factor); level 0 when nothing fits or no estimate exists yet.
pub fn rate_match(
    ladder_kbps: &[u32; LEVELS],
    estimate_mbps: Option<f64>,
    safety: f64,
) -> usize {
    let Some(estimate) = estimate_mbps else {
        return 0;
    };
    let budget = estimate * safety;
    (0..LEVELS)
        .rev()
        .find(|&level| ladder_kbps[level] as f64 / 1000.0 <= budget)
        .unwrap_or(0)
}
