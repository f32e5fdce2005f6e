//! Regenerates the repository's bundled `data/` directory: the seven sample
//! videos with their manifest, plus one synthetic network trace per
//! category. Everything is seeded, so the output is reproducible.
//!
//! Usage: `cargo run -p svsim-core --example gen_sample_data -- data`

use std::path::PathBuf;
use svsim_core::traces::{
    generate_synthetic_trace, sample_manifest, write_manifest, CategoryThresholds,
    SyntheticTraceParams, TraceCategory,
};

fn main() {
    let root: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data".to_string())
        .into();

    let videos = sample_manifest();
    let manifest = write_manifest(&root.join("videos"), &videos).expect("write videos");
    println!("wrote {}", manifest.display());

    // One trace per category; the bands pin the time-weighted mean.
    let bands = [
        ("low", 0.3, 1.2, TraceCategory::Low),
        ("medium", 1.6, 2.8, TraceCategory::Medium),
        ("high", 3.2, 6.0, TraceCategory::High),
    ];
    let net_dir = root.join("networks");
    std::fs::create_dir_all(&net_dir).expect("create networks dir");
    for (i, (name, min_bw, max_bw, expected)) in bands.into_iter().enumerate() {
        let trace = generate_synthetic_trace(&SyntheticTraceParams {
            min_bw_mbps: min_bw,
            max_bw_mbps: max_bw,
            seed: 100 + i as u64,
            ..Default::default()
        })
        .expect("generate trace");
        assert_eq!(trace.classify(CategoryThresholds::PUBLIC), expected);
        let path = net_dir.join(format!("{name}.txt"));
        std::fs::write(&path, trace.serialize()).expect("write trace");
        println!("wrote {}", path.display());
    }
}
