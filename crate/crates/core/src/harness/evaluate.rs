//! Parallel grid evaluation.
//!
//! Every (algorithm, condition) pair runs in a fresh session against a
//! fresh algorithm instance. Watch durations are drawn once per condition
//! from its seed, so all algorithms face the same viewer. Results are keyed
//! by grid position, making the report identical at any worker count.

use super::{build_grid, normalize, rank, Condition, ConditionResult, GridError, RankingReport};
use crate::algorithms::{Algorithm, AlgorithmContext, AlgorithmRegistry, OracleAlgorithm};
use crate::engine::{run_session, Session, SessionConfig};
use crate::retention::{sample_watch_duration, WatchDuration};
use crate::scoring::{score_session, QoeCoefficients};
use crate::traces::{CategoryThresholds, NetworkTrace, TraceCategory, VideoAsset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Reserved algorithm name wired to the full-knowledge reference policy.
pub const ORACLE_NAME: &str = "oracle";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("baseline {0:?} is not among the evaluated algorithms")]
    MissingBaseline(String),
    #[error("sequence {sequence:?} references unknown video {video:?}")]
    UnknownVideo { sequence: String, video: String },
    #[error("duplicate algorithm label {0:?}")]
    DuplicateLabel(String),
    #[error("baseline failed on condition {condition:?}: {message}")]
    BaselineFailed { condition: String, message: String },
}

/// One algorithm column of the evaluation.
pub struct AlgorithmEntry {
    pub label: String,
    /// Registry name ([`ORACLE_NAME`] short-circuits to the oracle).
    pub name: String,
    pub params: BTreeMap<String, String>,
}

pub struct EvalInputs {
    pub networks: Vec<Arc<NetworkTrace>>,
    /// `(sequence id, videos in order)`.
    pub sequences: Vec<(String, Vec<Arc<VideoAsset>>)>,
    pub algorithms: Vec<AlgorithmEntry>,
    /// Label of the algorithm whose score anchors MIN.
    pub baseline: String,
    pub user_samples: u32,
    pub master_seed: u64,
    pub coefficients: QoeCoefficients,
    pub thresholds: CategoryThresholds,
    pub workers: usize,
    pub session: SessionConfig,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalReport {
    pub algorithms: Vec<String>,
    pub conditions: Vec<ConditionResult>,
    pub ranking: RankingReport,
}

struct ConditionJob {
    condition: Condition,
    category: TraceCategory,
    network: Arc<NetworkTrace>,
    videos: Vec<Arc<VideoAsset>>,
    watches: Vec<WatchDuration>,
}

/// Runs the full grid and assembles the normalized, ranked report.
pub fn evaluate(inputs: &EvalInputs, registry: &AlgorithmRegistry) -> Result<EvalReport, EvalError> {
    let labels: Vec<String> = inputs.algorithms.iter().map(|a| a.label.clone()).collect();
    {
        let mut seen = std::collections::BTreeSet::new();
        for label in &labels {
            if !seen.insert(label) {
                return Err(EvalError::DuplicateLabel(label.clone()));
            }
        }
    }
    let baseline_index = labels
        .iter()
        .position(|l| *l == inputs.baseline)
        .ok_or_else(|| EvalError::MissingBaseline(inputs.baseline.clone()))?;
    for entry in &inputs.algorithms {
        if entry.name != ORACLE_NAME && !registry.contains(&entry.name) {
            return Err(EvalError::UnknownAlgorithm(entry.name.clone()));
        }
    }

    let network_ids: Vec<String> = inputs.networks.iter().map(|n| n.id().to_string()).collect();
    let sequence_ids: Vec<String> = inputs.sequences.iter().map(|(id, _)| id.clone()).collect();
    let grid = build_grid(&network_ids, &sequence_ids, inputs.user_samples, inputs.master_seed)?;

    let networks: BTreeMap<&str, &Arc<NetworkTrace>> = inputs
        .networks
        .iter()
        .map(|n| (n.id(), n))
        .collect();
    let sequences: BTreeMap<&str, &Vec<Arc<VideoAsset>>> = inputs
        .sequences
        .iter()
        .map(|(id, videos)| (id.as_str(), videos))
        .collect();

    // Draw each condition's viewer once, up front: fairness by construction.
    let jobs: Vec<ConditionJob> = grid
        .into_iter()
        .map(|condition| {
            let network = networks[condition.network.as_str()];
            let videos = sequences[condition.sequence.as_str()];
            let mut rng = ChaCha8Rng::seed_from_u64(condition.seed);
            let watches = videos
                .iter()
                .map(|v| sample_watch_duration(v.retention(), v.duration_ms(), &mut rng))
                .collect();
            ConditionJob {
                category: network.classify(inputs.thresholds),
                network: Arc::clone(network),
                videos: videos.clone(),
                watches,
                condition,
            }
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(inputs.workers.max(1))
        .build()
        .expect("worker pool construction cannot fail");
    let rows: Vec<Result<ConditionResult, EvalError>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| run_condition(job, inputs, registry, baseline_index))
            .collect()
    });
    let conditions = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let ranking = rank(&labels, &conditions);
    Ok(EvalReport {
        algorithms: labels,
        conditions,
        ranking,
    })
}

fn run_condition(
    job: &ConditionJob,
    inputs: &EvalInputs,
    registry: &AlgorithmRegistry,
    baseline_index: usize,
) -> Result<ConditionResult, EvalError> {
    let mut raw: Vec<Option<f64>> = vec![None; inputs.algorithms.len()];
    let mut failures = Vec::new();
    for (i, entry) in inputs.algorithms.iter().enumerate() {
        match run_one(job, entry, inputs, registry) {
            Ok(score) => raw[i] = Some(score),
            Err(message) => {
                if i == baseline_index {
                    return Err(EvalError::BaselineFailed {
                        condition: format!(
                            "{}/{}/{}",
                            job.condition.network, job.condition.sequence, job.condition.sample
                        ),
                        message,
                    });
                }
                failures.push(entry.label.clone());
            }
        }
    }
    let floor = raw[baseline_index].expect("baseline errors already returned");
    let raw: Vec<f64> = raw.into_iter().map(|s| s.unwrap_or(floor)).collect();
    let (max, min, normalized, degenerate) = normalize(&raw, baseline_index);
    Ok(ConditionResult {
        condition: job.condition.clone(),
        category: job.category,
        raw,
        max,
        min,
        normalized,
        degenerate,
        failures,
    })
}

fn run_one(
    job: &ConditionJob,
    entry: &AlgorithmEntry,
    inputs: &EvalInputs,
    registry: &AlgorithmRegistry,
) -> Result<f64, String> {
    let ladder = job
        .videos
        .first()
        .map(|v| v.ladder_kbps())
        .unwrap_or(AlgorithmContext::default().ladder_kbps);
    let ctx = AlgorithmContext {
        window_size: inputs.session.window_size,
        ladder_kbps: ladder,
        params: entry.params.clone(),
    };
    let mut algorithm: Box<dyn Algorithm> = if entry.name == ORACLE_NAME {
        let watch_ms = job.watches.iter().map(|w| w.ms()).collect();
        let mut oracle = OracleAlgorithm::new(watch_ms, Arc::clone(&job.network));
        oracle.initialize(&ctx);
        Box::new(oracle)
    } else {
        registry
            .create(&entry.name, &ctx)
            .ok_or_else(|| format!("unknown algorithm {:?}", entry.name))?
    };
    let mut session = Session::new(
        job.videos.clone(),
        Arc::clone(&job.network),
        &job.watches,
        inputs.session,
    )
    .map_err(|e| e.to_string())?;
    let trajectory = run_session(&mut session, algorithm.as_mut()).map_err(|e| e.to_string())?;
    let breakdown = score_session(&trajectory, &inputs.coefficients).map_err(|e| e.to_string())?;
    Ok(breakdown.session_score)
}
