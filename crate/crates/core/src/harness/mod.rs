//! The evaluation harness: build the (network x sequence x viewer) grid,
//! run every algorithm over it, normalize per-condition scores against the
//! designated baseline, and rank by summed normalized score.

mod config;
mod evaluate;
mod output;

pub use config::{AlgorithmSpec, HarnessConfig, SequenceSpec};
pub use evaluate::{evaluate, AlgorithmEntry, EvalError, EvalInputs, EvalReport, ORACLE_NAME};
pub use output::write_report;

use crate::traces::TraceCategory;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One evaluation scenario: a network trace, a video sequence, and one
/// sampled viewer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub network: String,
    pub sequence: String,
    pub sample: u32,
    /// Viewer seed: a pure function of (master seed, network, sequence,
    /// sample), independent of grid order.
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid inputs must be nonempty with at least one viewer sample")]
    EmptyInput,
}

/// FNV-1a over the length-prefixed condition coordinates. Stable by
/// construction: the constants are pinned here, not borrowed from a hasher
/// implementation that may change underneath us.
fn mix_seed(master_seed: u64, network: &str, sequence: &str, sample: u32) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    };
    eat(&master_seed.to_le_bytes());
    eat(&(network.len() as u64).to_le_bytes());
    eat(network.as_bytes());
    eat(&(sequence.len() as u64).to_le_bytes());
    eat(sequence.as_bytes());
    eat(&sample.to_le_bytes());
    hash
}

/// Full cartesian product of networks x sequences x viewer samples.
pub fn build_grid(
    networks: &[String],
    sequences: &[String],
    user_samples: u32,
    master_seed: u64,
) -> Result<Vec<Condition>, GridError> {
    if networks.is_empty() || sequences.is_empty() || user_samples == 0 {
        return Err(GridError::EmptyInput);
    }
    let mut grid = Vec::with_capacity(networks.len() * sequences.len() * user_samples as usize);
    for network in networks {
        for sequence in sequences {
            for sample in 0..user_samples {
                grid.push(Condition {
                    network: network.clone(),
                    sequence: sequence.clone(),
                    sample,
                    seed: mix_seed(master_seed, network, sequence, sample),
                });
            }
        }
    }
    Ok(grid)
}

/// Raw and normalized scores of every algorithm under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub category: TraceCategory,
    /// Raw scores, parallel to the algorithm list.
    pub raw: Vec<f64>,
    pub max: f64,
    /// The designated baseline's raw score.
    pub min: f64,
    /// `(S - MAX) / (MAX - MIN)`; all zero when the condition is degenerate
    /// (MAX == MIN), so it contributes nothing to any ranking.
    pub normalized: Vec<f64>,
    pub degenerate: bool,
    /// Algorithms that failed on this condition (scored as the baseline).
    pub failures: Vec<String>,
}

/// Normalizes one condition's raw scores. `baseline_index` supplies MIN; MAX
/// is the best raw score of any algorithm, the baseline included.
pub fn normalize(raw: &[f64], baseline_index: usize) -> (f64, f64, Vec<f64>, bool) {
    let min = raw[baseline_index];
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = max == min;
    let normalized = raw
        .iter()
        .map(|&s| if degenerate { 0.0 } else { (s - max) / (max - min) })
        .collect();
    (max, min, normalized, degenerate)
}

/// One algorithm's standing in the final ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub algorithm: String,
    /// Sum of normalized scores over all conditions.
    pub total: f64,
    pub per_category: CategorySums,
    pub conditions_failed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategorySums {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl CategorySums {
    fn add(&mut self, category: TraceCategory, value: f64) {
        match category {
            TraceCategory::Low => self.low += value,
            TraceCategory::Medium => self.medium += value,
            TraceCategory::High => self.high += value,
        }
    }
}

/// Algorithms ordered by descending summed normalized score; ties broken
/// lexicographically by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub entries: Vec<RankEntry>,
}

pub fn rank(algorithms: &[String], conditions: &[ConditionResult]) -> RankingReport {
    let mut entries: Vec<RankEntry> = algorithms
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut total = 0.0;
            let mut per_category = CategorySums::default();
            let mut conditions_failed = 0;
            for result in conditions {
                let value = result.normalized[i];
                total += value;
                per_category.add(result.category, value);
                if result.failures.iter().any(|f| f == name) {
                    conditions_failed += 1;
                }
            }
            RankEntry {
                rank: 0,
                algorithm: name.clone(),
                total,
                per_category,
                conditions_failed,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.total
            .total_cmp(&a.total)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });
    for (i, entry) in entries.iter_mut().enumerate() {
        entry.rank = i + 1;
    }
    RankingReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_the_full_cartesian_product() {
        let networks = vec!["n1".into(), "n2".into(), "n3".into()];
        let sequences = vec!["s1".into(), "s2".into()];
        let grid = build_grid(&networks, &sequences, 50, 7).unwrap();
        assert_eq!(grid.len(), 300);
    }

    #[test]
    fn single_cell_grid() {
        let grid = build_grid(&["n".into()], &["s".into()], 1, 0).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid[0].sample, 0);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert_eq!(
            build_grid(&[], &["s".into()], 1, 0).unwrap_err(),
            GridError::EmptyInput
        );
        assert_eq!(
            build_grid(&["n".into()], &["s".into()], 0, 0).unwrap_err(),
            GridError::EmptyInput
        );
    }

    #[test]
    fn seeds_are_order_independent() {
        let a = build_grid(&["n1".into(), "n2".into()], &["s".into()], 3, 9).unwrap();
        let b = build_grid(&["n2".into(), "n1".into()], &["s".into()], 3, 9).unwrap();
        for cond in &a {
            let twin = b
                .iter()
                .find(|c| c.network == cond.network && c.sample == cond.sample)
                .unwrap();
            assert_eq!(twin.seed, cond.seed);
        }
    }

    #[test]
    fn seeds_do_not_collide_across_coordinates() {
        // Length prefixes keep ("ab", "c") and ("a", "bc") apart.
        let x = mix_seed(1, "ab", "c", 0);
        let y = mix_seed(1, "a", "bc", 0);
        assert_ne!(x, y);
        assert_ne!(mix_seed(1, "n", "s", 0), mix_seed(2, "n", "s", 0));
        assert_ne!(mix_seed(1, "n", "s", 0), mix_seed(1, "n", "s", 1));
    }

    #[test]
    fn normalization_pins_baseline_and_best() {
        let raw = vec![3.0, 9.0, 6.0];
        let (max, min, normalized, degenerate) = normalize(&raw, 0);
        assert!(!degenerate);
        assert_eq!(max, 9.0);
        assert_eq!(min, 3.0);
        assert_eq!(normalized, vec![-1.0, 0.0, -0.5]);
    }

    #[test]
    fn below_baseline_scores_stay_unclamped() {
        let raw = vec![3.0, 9.0, 1.0];
        let (_, _, normalized, _) = normalize(&raw, 0);
        assert!(normalized[2] < -1.0);
    }

    #[test]
    fn degenerate_conditions_contribute_zero() {
        let raw = vec![4.0, 4.0, 4.0];
        let (_, _, normalized, degenerate) = normalize(&raw, 0);
        assert!(degenerate);
        assert!(normalized.iter().all(|&v| v == 0.0));
    }

    fn result(raw: Vec<f64>, category: TraceCategory) -> ConditionResult {
        let (max, min, normalized, degenerate) = normalize(&raw, 0);
        ConditionResult {
            condition: Condition {
                network: "n".into(),
                sequence: "s".into(),
                sample: 0,
                seed: 0,
            },
            category,
            raw,
            max,
            min,
            normalized,
            degenerate,
            failures: vec![],
        }
    }

    #[test]
    fn ranking_sorts_by_total_then_name() {
        let algorithms: Vec<String> = vec!["base".into(), "beta".into(), "alpha".into()];
        let conditions = vec![
            result(vec![1.0, 2.0, 2.0], TraceCategory::Low),
            result(vec![1.0, 3.0, 3.0], TraceCategory::High),
        ];
        let ranking = rank(&algorithms, &conditions);
        assert_eq!(ranking.entries[0].algorithm, "alpha");
        assert_eq!(ranking.entries[1].algorithm, "beta");
        assert_eq!(ranking.entries[2].algorithm, "base");
        assert_eq!(ranking.entries[0].rank, 1);
        assert_eq!(ranking.entries[2].total, -2.0);
    }

    #[test]
    fn all_tied_conditions_leave_everyone_at_zero() {
        let algorithms: Vec<String> = vec!["b".into(), "a".into()];
        let conditions = vec![result(vec![5.0, 5.0], TraceCategory::Medium)];
        let ranking = rank(&algorithms, &conditions);
        assert!(ranking.entries.iter().all(|e| e.total == 0.0));
        assert_eq!(ranking.entries[0].algorithm, "a");
    }

    #[test]
    fn min_max_normalization_preserves_the_order() {
        // The paper-literal form differs from min-max by a constant -1 per
        // condition, so rankings agree.
        let algorithms: Vec<String> = vec!["base".into(), "x".into(), "y".into()];
        let conditions: Vec<ConditionResult> = vec![
            result(vec![1.0, 4.0, 2.0], TraceCategory::Low),
            result(vec![0.0, 1.0, 3.0], TraceCategory::Low),
        ];
        let paper = rank(&algorithms, &conditions);
        let minmax = {
            let mut shifted = conditions.clone();
            for c in &mut shifted {
                if !c.degenerate {
                    for v in &mut c.normalized {
                        *v += 1.0;
                    }
                }
            }
            rank(&algorithms, &shifted)
        };
        let paper_order: Vec<_> = paper.entries.iter().map(|e| &e.algorithm).collect();
        let minmax_order: Vec<_> = minmax.entries.iter().map(|e| &e.algorithm).collect();
        assert_eq!(paper_order, minmax_order);
    }
}
