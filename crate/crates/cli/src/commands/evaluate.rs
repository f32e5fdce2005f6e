//! The `evaluate` subcommand: config loading, trace discovery, grid run,
//! artifact writing.

use crate::EvaluateArgs;
use anyhow::{bail, Context};
use std::path::Path;
use std::sync::Arc;
use svsim_core::algorithms::AlgorithmRegistry;
use svsim_core::engine::SessionConfig;
use svsim_core::harness::{evaluate, write_report, AlgorithmEntry, EvalInputs, HarnessConfig};
use svsim_core::traces::{load_manifest, parse_network_trace, CategoryThresholds, NetworkTrace};

/// Builds evaluation inputs from a parsed config, resolving paths relative
/// to the config file's directory.
pub fn load_eval_inputs(
    config: &HarnessConfig,
    base: &Path,
    workers: Option<usize>,
    seed: Option<u64>,
) -> anyhow::Result<EvalInputs> {
    let mut networks: Vec<Arc<NetworkTrace>> = Vec::new();
    let mut network_paths = Vec::new();
    if let Some(dir) = &config.input.network_dir {
        let dir = base.join(dir);
        let mut entries: Vec<_> = std::fs::read_dir(&dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "txt") {
                network_paths.push(path);
            }
        }
    }
    network_paths.extend(config.input.network_files.iter().map(|p| base.join(p)));
    for path in network_paths {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        networks.push(Arc::new(
            parse_network_trace(&text, id)
                .with_context(|| format!("parsing {}", path.display()))?,
        ));
    }
    if networks.is_empty() {
        bail!("no network traces found");
    }

    let manifest_path = base.join(&config.input.manifest);
    let videos = load_manifest(&manifest_path)
        .with_context(|| format!("loading {}", manifest_path.display()))?;
    let by_name: std::collections::BTreeMap<&str, &Arc<_>> =
        videos.iter().map(|v| (v.name(), v)).collect();

    let mut sequences = Vec::new();
    if config.sequences.is_empty() {
        // No explicit sequences: the manifest order is the sequence.
        sequences.push(("manifest".to_string(), videos.clone()));
    }
    for spec in &config.sequences {
        let mut list = Vec::with_capacity(spec.videos.len());
        for name in &spec.videos {
            let video = by_name.get(name.as_str()).ok_or_else(|| {
                anyhow::anyhow!("sequence {:?} references unknown video {:?}", spec.id, name)
            })?;
            list.push(Arc::clone(video));
        }
        sequences.push((spec.id.clone(), list));
    }

    let algorithms = config
        .algorithms
        .iter()
        .map(|spec| AlgorithmEntry {
            label: spec.label().to_string(),
            name: spec.name.clone(),
            params: spec.string_params(),
        })
        .collect();

    Ok(EvalInputs {
        networks,
        sequences,
        algorithms,
        baseline: config.baseline.clone(),
        user_samples: config.user_samples,
        master_seed: seed.unwrap_or(config.master_seed),
        coefficients: config.qoe.into(),
        thresholds: CategoryThresholds::new(config.thresholds.low, config.thresholds.high)?,
        workers: workers.or(config.workers).unwrap_or(1),
        session: SessionConfig::default(),
    })
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> anyhow::Result<()> {
    let config = HarnessConfig::from_file(&args.config).map_err(anyhow::Error::msg)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let inputs = load_eval_inputs(&config, base, args.workers, args.seed)?;
    let registry = AlgorithmRegistry::with_builtins();
    let report = evaluate(&inputs, &registry)?;
    write_report(&args.out, &report)?;
    let winner = report
        .ranking
        .entries
        .first()
        .map(|e| format!("{} ({:.3})", e.algorithm, e.total))
        .unwrap_or_else(|| "-".into());
    println!(
        "evaluated {} algorithm(s) over {} condition(s) with {} worker(s); best: {} -> {}",
        report.algorithms.len(),
        report.conditions.len(),
        inputs.workers,
        winner,
        args.out.display()
    );
    Ok(())
}
