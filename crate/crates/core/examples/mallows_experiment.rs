//! The full pipeline on Mallows markets: learn windows, then compare DA, WDA
//! and PDA. Writes CSV, metadata and SVG plots into `target/mallows_experiment`.

use predmatch::experiment::{run_experiment, ExperimentConfig};

fn main() {
    let mut cfg = ExperimentConfig::mallows(200, vec![0.0, 0.25, 0.5, 0.75, 1.0], 1, "target/mallows_experiment");
    cfg.k_train = 30;
    cfg.k_eval = 30;
    let (results, files) = run_experiment(&cfg).unwrap();
    println!("{:>5} {:>4} {:>10} {:>10} {:>7} {:>6}", "phi", "algo", "proposals", "size", "stable", "runs");
    for r in &results.rows {
        println!(
            "{:>5} {:>4} {:>10.1} {:>10.1} {:>6.1}% {:>6.2}",
            r.sweep,
            r.algo.name(),
            r.proposals_mean,
            r.size_mean,
            r.stable_pct,
            r.iters_mean
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
}
