//! Brute-force enumeration of every stable matching of a small market.

use predmatch::generators::sample_uniform;
use predmatch::oracle::{closest_to_prediction, enumerate_stable};
use predmatch::truncation::prune_prefix;
use predmatch::{run_da, Side};

fn main() {
    let (seed, s) = (0..)
        .map(|seed| (seed, enumerate_stable(&sample_uniform(8, seed)).unwrap()))
        .find(|(_, s)| s.len() >= 4)
        .unwrap();
    let inst = sample_uniform(8, seed);
    println!("seed {seed}: {} stable matchings", s.len());
    for mu in s.matchings() {
        println!("  {mu}");
    }
    assert_eq!(s.resident_optimal(), &run_da(&inst, Side::Residents).0);
    assert_eq!(s.hospital_optimal(), &run_da(&inst, Side::Hospitals).0);
    println!("resident-optimal  {}", s.resident_optimal());
    println!("hospital-optimal  {}", s.hospital_optimal());

    let rho = vec![4; 8];
    let pruned = prune_prefix(&inst, &rho).unwrap();
    let t = enumerate_stable(pruned.instance()).unwrap();
    println!("stable matchings after cutting every hospital list to 4: {}", t.len());
    println!("closest to the prediction {}", closest_to_prediction(&t, &pruned, &rho).unwrap());
}
