//! Subcommand implementations.

pub mod evaluate;

use crate::{GenNetArgs, InspectArgs, RunArgs, SampleRetentionArgs, ScoreArgs};
use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use svsim_core::algorithms::AlgorithmRegistry;
use svsim_core::engine::{
    run_session, write_trajectory, Session, SessionConfig, TrajectoryMeta,
};
use svsim_core::retention::{sample_watch_duration, sampling_deviation, empirical_retention};
use svsim_core::scoring::{score_session, waste_report, QoeCoefficients};
use svsim_core::traces::{
    generate_synthetic_trace, load_manifest, parse_network_trace, parse_retention_trace,
    CategoryThresholds, SyntheticTraceParams,
};
use svsim_core::AlgorithmContext;

pub fn gen_net(args: &GenNetArgs) -> anyhow::Result<()> {
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut seeds = ChaCha8Rng::seed_from_u64(args.seed);
    for i in 0..args.count {
        let params = SyntheticTraceParams {
            min_bw_mbps: args.min_bw,
            max_bw_mbps: args.max_bw,
            mean_state_duration_s: args.state_dur,
            noise_std_mbps: args.noise_std,
            length_s: args.len,
            seed: seeds.random(),
        };
        let trace = generate_synthetic_trace(&params)?;
        let path = args.out.join(format!("trace_{i:03}.txt"));
        std::fs::write(&path, trace.serialize())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "wrote {} trace(s) of {} s to {} (seed {})",
        args.count,
        args.len,
        args.out.display(),
        args.seed
    );
    Ok(())
}

pub fn inspect(args: &InspectArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let name = args.file.display();
    let fields = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().count())
        .unwrap_or(0);

    if fields == 1 {
        // One integer per line: a video size file.
        let sizes: Result<Vec<u64>, _> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<u64>())
            .collect();
        return match sizes {
            Ok(sizes) if !sizes.is_empty() && sizes.iter().all(|&s| s > 0) => {
                let total: u64 = sizes.iter().sum();
                println!(
                    "{name}: video size trace, valid, {} chunks, {} bytes total",
                    sizes.len(),
                    total
                );
                Ok(())
            }
            _ => {
                println!("{name}: video size trace, invalid (sizes must be positive integers)");
                Ok(())
            }
        };
    }

    // Retention first: its end mark (zero value) can never be a valid
    // network throughput, so the two formats are disjoint.
    match parse_retention_trace(&text) {
        Ok(curve) => {
            println!(
                "{name}: retention trace, valid, {} entries, final second {}",
                curve.len(),
                curve.final_second()
            );
            return Ok(());
        }
        Err(retention_err) => match parse_network_trace(&text, "inspect") {
            Ok(trace) => {
                let thresholds = CategoryThresholds::new(args.thresholds.0, args.thresholds.1)?;
                let mean =
                    trace.integral_bits(0, trace.period_ms()) as f64 / trace.period_ms() as f64 / 1000.0;
                println!(
                    "{name}: network trace, valid, {} points, {:.1} s period, mean {:.2} Mbps, category {} (thresholds {},{})",
                    trace.len(),
                    trace.period_ms() as f64 / 1000.0,
                    mean,
                    trace.classify(thresholds),
                    args.thresholds.0,
                    args.thresholds.1,
                );
                return Ok(());
            }
            Err(network_err) => {
                println!(
                    "{name}: unrecognized two-column trace (as network: {network_err}; as retention: {retention_err})"
                );
                bail!("{name}: not a valid trace file");
            }
        },
    }
}

pub fn sample_retention(args: &SampleRetentionArgs) -> anyhow::Result<()> {
    if args.n == 0 || args.repeats == 0 {
        bail!("--n and --repeats must be at least 1");
    }
    let text = std::fs::read_to_string(&args.curve)
        .with_context(|| format!("reading {}", args.curve.display()))?;
    let curve = parse_retention_trace(&text)?;
    let duration_ms = (curve.final_second() as u64 * 1000).max(1);

    // The displayed sampled curve is the first repeat of the deviation
    // study: one rng stream drives both.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let samples: Vec<_> = (0..args.n)
        .map(|_| sample_watch_duration(&curve, duration_ms, &mut rng))
        .collect();
    let empirical = empirical_retention(&samples, duration_ms)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let stats = sampling_deviation(&curve, args.n, args.repeats, &mut rng);

    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(&args.out)?;
    writer.write_record(["second", "true_fraction", "sampled_fraction"])?;
    let seconds = curve.len().max(empirical.len()) as u32;
    for s in 0..seconds {
        writer.write_record([
            s.to_string(),
            curve.fraction_at(s).to_string(),
            empirical.fraction_at(s).to_string(),
        ])?;
    }
    writer.flush()?;
    println!(
        "n={} repeats={} median max deviation {:.4}, p90 {:.4} -> {}",
        args.n,
        args.repeats,
        stats.median,
        stats.p90,
        args.out.display()
    );
    Ok(())
}

pub fn run_single(args: &RunArgs) -> anyhow::Result<()> {
    let net_text = std::fs::read_to_string(&args.net)
        .with_context(|| format!("reading {}", args.net.display()))?;
    let net_id = args
        .net
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "network".into());
    let network = Arc::new(parse_network_trace(&net_text, net_id)?);
    let videos = load_manifest(&args.manifest)?;
    if videos.is_empty() {
        bail!("manifest lists no videos");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let watches: Vec<_> = videos
        .iter()
        .map(|v| sample_watch_duration(v.retention(), v.duration_ms(), &mut rng))
        .collect();

    let registry = AlgorithmRegistry::with_builtins();
    let ctx = AlgorithmContext {
        ladder_kbps: videos[0].ladder_kbps(),
        params: args.params.iter().cloned().collect(),
        ..AlgorithmContext::default()
    };
    let mut algorithm = registry
        .create(&args.algo, &ctx)
        .with_context(|| format!("unknown algorithm {:?}", args.algo))?;

    let mut session = Session::new(
        videos.clone(),
        Arc::clone(&network),
        &watches,
        SessionConfig::default(),
    )?;
    let trajectory = run_session(&mut session, algorithm.as_mut())?;
    let breakdown = score_session(&trajectory, &QoeCoefficients::default())?;
    let waste = waste_report(&trajectory);

    let meta = TrajectoryMeta {
        algorithm: args.algo.clone(),
        network: network.id().to_string(),
        videos: videos.iter().map(|v| v.name().to_string()).collect(),
        seed: args.seed,
        ended: trajectory.ended,
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let file = std::fs::File::create(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    write_trajectory(std::io::BufWriter::new(file), &meta, &trajectory)?;

    println!(
        "{}: score {:.3}, {} steps, {:.1} s wall, {:.1} s rebuf, {:.2} Mb waste -> {}",
        args.algo,
        breakdown.session_score,
        trajectory.steps.len(),
        trajectory.total_delay_ms() as f64 / 1000.0,
        trajectory.total_rebuf_ms() as f64 / 1000.0,
        waste.total_megabits,
        args.out.display()
    );
    Ok(())
}

pub fn score(args: &ScoreArgs) -> anyhow::Result<()> {
    let file = std::fs::File::open(&args.trajectory)
        .with_context(|| format!("reading {}", args.trajectory.display()))?;
    let (meta, trajectory) =
        svsim_core::engine::read_trajectory(std::io::BufReader::new(file))?;
    let coefficients = QoeCoefficients {
        alpha: args.alpha,
        beta: args.beta,
        gamma: args.gamma,
        theta: args.theta,
    };
    let breakdown = score_session(&trajectory, &coefficients)?;
    let output = serde_json::json!({
        "algorithm": meta.algorithm,
        "network": meta.network,
        "coefficients": coefficients,
        "breakdown": breakdown,
    });
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}
