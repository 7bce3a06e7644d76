//! Window-truncated DA with windows of half-width eta around a stable matching,
//! against windows centred on the wrong ranks.

use predmatch::generators::sample_uniform;
use predmatch::{run_da, run_wda, PredictionWindow, Side};

fn main() {
    let n = 300;
    let inst = sample_uniform(n, 7);
    let (opt, da) = run_da(&inst, Side::Residents);
    let rho: Vec<usize> = (0..n).map(|h| inst.hospital_rank(h, opt.resident_of(h).unwrap()).unwrap()).collect();
    println!("classic DA: {} proposals", da.proposals);

    for eta in [0, 2, 5, 20] {
        let pred = PredictionWindow::centered(n, &rho, &vec![eta; n]).unwrap();
        let out = run_wda(&inst, &pred, Side::Residents);
        println!(
            "eta {eta:>2}: {:>6} proposals (bound {}), {} lists entries, {}",
            out.stats.proposals,
            n * (2 * eta + 1),
            out.instance_size,
            out.verdict
        );
    }

    let shifted: Vec<usize> = rho.iter().map(|&r| (r + 40).min(n)).collect();
    let pred = PredictionWindow::centered(n, &shifted, &vec![5; n]).unwrap();
    let out = run_wda(&inst, &pred, Side::Residents);
    println!("shifted windows: perfect {}, {}", out.perfect, out.verdict);
}
