//! Prefix-truncated DA: a single round certifies under-predicted hospitals,
//! and the adaptive loop extends only those until the matching is perfect.

use predmatch::generators::{sample_mallows, MallowsParams};
use predmatch::model::agent_label;
use predmatch::{run_da, run_pda_adaptive, run_pda_once, Side};

fn main() {
    let n = 400;
    let inst = sample_mallows(&MallowsParams::new(n, 0.6).unwrap(), 3);
    let (opt, da) = run_da(&inst, Side::Residents);
    let ranks: Vec<usize> = (0..n).map(|h| inst.hospital_rank(h, opt.resident_of(h).unwrap()).unwrap()).collect();

    // under-predict every tenth hospital by a few ranks
    let rho: Vec<usize> = ranks.iter().enumerate().map(|(h, &r)| if h % 10 == 0 { r.saturating_sub(3).max(1) } else { r }).collect();

    let round = run_pda_once(&inst, &rho).unwrap();
    let flagged: Vec<String> = round.unmatched_hospitals.iter().take(8).map(|&h| agent_label(Side::Hospitals, h)).collect();
    println!("one round: {} unmatched hospitals, e.g. {}", round.unmatched_hospitals.len(), flagged.join(" "));

    let out = run_pda_adaptive(&inst, &rho, (n / 8).max(1), 2).unwrap();
    println!(
        "adaptive: {} rounds, {} proposals vs {} for DA, instance size {}, {}",
        out.rounds, out.stats.proposals, da.proposals, out.instance_size, out.verdict
    );
}
