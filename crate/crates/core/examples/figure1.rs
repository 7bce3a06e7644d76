//! The four-by-four market where hospital-proposing window truncation goes wrong.

use predmatch::oracle::enumerate_stable;
use predmatch::{figure1_instance, run_wda, Side};

fn main() {
    let (inst, stable, windows) = figure1_instance();
    for h in 0..inst.n() {
        let w = windows.get(h);
        println!("h{} keeps ranks {}..={} of {:?}", h + 1, w.lo, w.hi, inst.hospital_list(h));
    }
    println!("stable matchings: {}", enumerate_stable(&inst).unwrap().len());

    let hosp = run_wda(&inst, &windows, Side::Hospitals);
    println!("hospitals propose: {} -> {}", hosp.matching, hosp.verdict);

    let res = run_wda(&inst, &windows, Side::Residents);
    println!("residents propose: {} -> {}", res.matching, res.verdict);
    assert_eq!(res.matching, stable);
}
