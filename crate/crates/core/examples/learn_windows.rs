//! Learns rank windows from past tiered markets and applies them to a new one.

use predmatch::generators::{sample_tiered, TierParams};
use predmatch::predictions::{learn_windows, train};
use predmatch::{run_da, run_wda, Side};

fn main() {
    let n = 250;
    let tiers = TierParams::default();
    let log = train(|s| Ok(sample_tiered(n, &tiers, s)), 50, Side::Residents, 11).unwrap();
    let windows = learn_windows(&log).unwrap();
    for h in [0, n / 4, n / 2, n - 1] {
        let seen = &log.ranks()[h];
        let w = windows.get(h);
        println!(
            "h{:<4} observed ranks {}..{} -> window [{}, {}]",
            h + 1,
            seen.iter().min().unwrap(),
            seen.iter().max().unwrap(),
            w.lo,
            w.hi
        );
    }
    println!("mean width {:.1} of {n}", windows.total_width() as f64 / n as f64);

    let fresh = sample_tiered(n, &tiers, 999_999);
    let (_, da) = run_da(&fresh, Side::Residents);
    let out = run_wda(&fresh, &windows, Side::Residents);
    println!("fresh market: DA {} proposals, WDA {} proposals, {}", da.proposals, out.stats.proposals, out.verdict);
}
