//! Temporary diagnostic: where and why baselines beat the oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use svsim_core::algorithms::{Algorithm, NoPrefetch, OracleAlgorithm};
use svsim_core::engine::{run_session, Session, SessionConfig};
use svsim_core::retention::sample_watch_duration;
use svsim_core::scoring::{score_session, waste_report, QoeCoefficients};
use svsim_core::traces::{generate_synthetic_trace, sample_manifest, SyntheticTraceParams};

fn main() {
    let videos = sample_manifest();
    let bands = [(0.3, 1.2, "low"), (1.6, 2.8, "med"), (3.2, 6.0, "high")];
    let mut losses = 0;
    let mut total = 0;
    for (min_bw, max_bw, cat) in bands {
        for net_seed in 0..3u64 {
            let network = Arc::new(
                generate_synthetic_trace(&SyntheticTraceParams {
                    min_bw_mbps: min_bw,
                    max_bw_mbps: max_bw,
                    seed: 7000 + net_seed,
                    ..Default::default()
                })
                .unwrap(),
            );
            for user in 0..15u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(user * 31 + net_seed);
                let watches: Vec<_> = videos
                    .iter()
                    .map(|v| sample_watch_duration(v.retention(), v.duration_ms(), &mut rng))
                    .collect();
                let run = |mut algo: Box<dyn Algorithm>| {
                    let mut s = Session::new(
                        videos.clone(),
                        Arc::clone(&network),
                        &watches,
                        SessionConfig::default(),
                    )
                    .unwrap();
                    let t = run_session(&mut s, algo.as_mut()).unwrap();
                    let b = score_session(&t, &QoeCoefficients::default()).unwrap();
                    (b, t)
                };
                let (ob, ot) = run(Box::new(OracleAlgorithm::new(
                    watches.iter().map(|w| w.ms()).collect(),
                    Arc::clone(&network),
                )));
                let (nb, nt) = run(Box::new(NoPrefetch::new(5)));
                total += 1;
                if nb.session_score > ob.session_score {
                    losses += 1;
                    if losses <= 6 {
                        let o_quality: f64 = ob.videos.iter().map(|v| v.quality).sum();
                        let o_smooth: f64 = ob.videos.iter().map(|v| v.smoothness).sum();
                        let o_rebuf: f64 = ob.videos.iter().map(|v| v.rebuf_seconds).sum();
                        let o_mb: f64 = ob.videos.iter().map(|v| v.megabits).sum();
                        let n_quality: f64 = nb.videos.iter().map(|v| v.quality).sum();
                        let n_smooth: f64 = nb.videos.iter().map(|v| v.smoothness).sum();
                        let n_rebuf: f64 = nb.videos.iter().map(|v| v.rebuf_seconds).sum();
                        let n_mb: f64 = nb.videos.iter().map(|v| v.megabits).sum();
                        println!(
                            "{cat} net{net_seed} user{user}: oracle {:.2} vs np {:.2}",
                            ob.session_score, nb.session_score
                        );
                        println!(
                            "  oracle: q {o_quality:.2} sm {o_smooth:.2} rebuf {o_rebuf:.2} mb {o_mb:.2} waste {:.2} steps {}",
                            waste_report(&ot).total_megabits,
                            ot.steps.len()
                        );
                        println!(
                            "  nopref: q {n_quality:.2} sm {n_smooth:.2} rebuf {n_rebuf:.2} mb {n_mb:.2} waste {:.2} steps {}",
                            waste_report(&nt).total_megabits,
                            nt.steps.len()
                        );
                        let watch_s: Vec<u64> = watches.iter().map(|w| w.ms() / 1000).collect();
                        println!("  watches(s): {watch_s:?}");
                    }
                }
            }
        }
    }
    println!("oracle lost {losses}/{total} to no_prefetch");
}
