//! Set disjointness encoded as a stable-matching instance: the identity
//! prediction is stable exactly when A and B share no pair.

use std::collections::BTreeSet;

use predmatch::gadget::{build_gadget, DisjointnessInstance};
use predmatch::oracle::enumerate_stable;
use predmatch::verify_stability;

fn main() {
    let a = BTreeSet::from([(1, 2), (3, 1)]);
    for b in [BTreeSet::from([(2, 3)]), BTreeSet::from([(3, 1)])] {
        let d = DisjointnessInstance::new(3, 1, a.clone(), b.clone()).unwrap();
        let g = build_gadget(&d);
        let verdict = verify_stability(&g.inst, &g.predicted);
        let best = enumerate_stable(&g.inst)
            .unwrap()
            .matchings()
            .iter()
            .map(|mu| g.max_error(mu).unwrap())
            .min()
            .unwrap();
        println!("B = {b:?}: n = {}, prediction {verdict}, best stable max error {best} (eta = 1)", g.n());
        if let Ok(fix) = g.repair_matching() {
            println!(
                "  repair changes {} agents, average error {:.2}, {}",
                fix.changed_agents(&g.predicted),
                g.average_error(&fix).unwrap(),
                verify_stability(&g.inst, &fix)
            );
        }
    }
}
