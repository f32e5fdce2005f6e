//! The `svsim` command line: trace generation and inspection, single-session
//! runs, trajectory scoring, retention sampling studies, and grid
//! evaluation. All randomness flows from explicit `--seed` flags and output
//! artifacts carry no timestamps, so reruns are byte-identical.

mod commands;

pub use commands::evaluate::load_eval_inputs;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "svsim", version, about = "Chunk-level multi-video prefetch simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic network traces.
    GenNet(GenNetArgs),
    /// Identify a trace file, validate it, and categorize network traces.
    Inspect(InspectArgs),
    /// Compare sampled watch durations against a retention curve.
    SampleRetention(SampleRetentionArgs),
    /// Run one session of an algorithm and export its trajectory.
    Run(RunArgs),
    /// Score a previously exported trajectory.
    Score(ScoreArgs),
    /// Run the full evaluation grid from a config file.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct GenNetArgs {
    /// Number of traces to generate.
    #[arg(long, default_value_t = 1)]
    pub count: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (one `trace_NNN.txt` per trace).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub min_bw: f64,
    #[arg(long, default_value_t = 4.3)]
    pub max_bw: f64,
    #[arg(long, default_value_t = 0.3)]
    pub noise_std: f64,
    /// Mean hidden-state duration, seconds.
    #[arg(long, default_value_t = 5.0)]
    pub state_dur: f64,
    /// Trace length, seconds.
    #[arg(long, default_value_t = 300)]
    pub len: u32,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub file: PathBuf,
    /// Category cuts as `low,high` in Mbps.
    #[arg(long, value_parser = parse_thresholds, default_value = "1.5,3")]
    pub thresholds: (f64, f64),
}

fn parse_thresholds(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| "expected low,high".to_string())?;
    let low: f64 = a.trim().parse().map_err(|_| format!("bad threshold {a:?}"))?;
    let high: f64 = b.trim().parse().map_err(|_| format!("bad threshold {b:?}"))?;
    Ok((low, high))
}

#[derive(Debug, Args)]
pub struct SampleRetentionArgs {
    /// Retention curve file.
    #[arg(long)]
    pub curve: PathBuf,
    /// Viewers sampled per repeat.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV: per-second true vs sampled fractions.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Algorithm name (`no_prefetch`, `fixed_prefetch`, `threshold`).
    #[arg(long)]
    pub algo: String,
    /// Network trace file.
    #[arg(long)]
    pub net: PathBuf,
    /// Video manifest; its order is the playback sequence.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Seed for the hidden watch durations.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trajectory output file (JSON Lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Algorithm parameter, `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Trajectory file from `svsim run`.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.85)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Evaluation config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for the report artifacts.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to SVSIM_WORKERS, then the config, then 1.
    #[arg(long, env = "SVSIM_WORKERS")]
    pub workers: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs a parsed command; errors are input errors (exit 1 with a JSON
/// diagnostic on stderr). Usage errors exit 2 inside clap before this.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenNet(args) => commands::gen_net(&args),
        Command::Inspect(args) => commands::inspect(&args),
        Command::SampleRetention(args) => commands::sample_retention(&args),
        Command::Run(args) => commands::run_single(&args),
        Command::Score(args) => commands::score(&args),
        Command::Evaluate(args) => commands::evaluate::evaluate_cmd(&args),
    }
}

/// Entry point shared by `main`: maps errors to the documented exit codes.
pub fn main_impl() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let diagnostic = serde_json::json!({ "error": err.to_string() });
            eprintln!("{diagnostic}");
            ExitCode::from(1)
        }
    }
}
