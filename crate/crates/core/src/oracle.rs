//! Brute-force ground truth for small markets.
//!
//! Stable matchings are enumerated by assigning residents one at a time (to a
//! free hospital that lists them, or to nobody) and abandoning a branch as soon
//! as a pair whose two sides are already decided blocks it.

use crate::error::{Error, Result};
use crate::model::{verify_stability, Instance, Matching, Side};
use crate::truncation::PrunedInstance;

/// Largest market the oracle accepts.
pub const MAX_ORACLE_N: usize = 9;

/// Every stable matching of one instance, with its two extremes.
#[derive(Debug, Clone)]
pub struct StableSet {
    matchings: Vec<Matching>,
    resident_optimal: usize,
    hospital_optimal: usize,
}

impl StableSet {
    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    pub fn contains(&self, mu: &Matching) -> bool {
        self.matchings.contains(mu)
    }

    pub fn resident_optimal(&self) -> &Matching {
        &self.matchings[self.resident_optimal]
    }

    pub fn hospital_optimal(&self) -> &Matching {
        &self.matchings[self.hospital_optimal]
    }

    /// All members leave the same agents unmatched.
    pub fn unmatched_sets_agree(&self) -> bool {
        let first = &self.matchings[0];
        let (r0, h0) = (first.unmatched(Side::Residents), first.unmatched(Side::Hospitals));
        self.matchings.iter().all(|m| m.unmatched(Side::Residents) == r0 && m.unmatched(Side::Hospitals) == h0)
    }
}

struct Search<'a> {
    inst: &'a Instance,
    allow_unmatched: bool,
    resident_choice: Vec<Option<usize>>,
    holder: Vec<Option<usize>>,
    found: Vec<Matching>,
}

impl Search<'_> {
    fn prefers_resident(&self, r: usize, h: usize, current: Option<usize>) -> bool {
        let Some(cand) = self.inst.resident_rank(r, h) else { return false };
        current.and_then(|c| self.inst.resident_rank(r, c)).is_none_or(|cur| cand < cur)
    }

    fn prefers_hospital(&self, h: usize, r: usize, current: Option<usize>) -> bool {
        let Some(cand) = self.inst.hospital_rank(h, r) else { return false };
        current.and_then(|c| self.inst.hospital_rank(h, c)).is_none_or(|cur| cand < cur)
    }

    /// Checks the pairs that became fully decided when resident `r` was placed.
    fn consistent_after(&self, r: usize) -> bool {
        let choice = self.resident_choice[r];
        for (h2, holder) in self.holder.iter().enumerate() {
            if let Some(r2) = *holder {
                if r2 != r && self.prefers_resident(r, h2, choice) && self.prefers_hospital(h2, r, Some(r2)) {
                    return false;
                }
            }
        }
        if let Some(h) = choice {
            for r2 in 0..r {
                if self.prefers_resident(r2, h, self.resident_choice[r2]) && self.prefers_hospital(h, r2, Some(r)) {
                    return false;
                }
            }
        }
        true
    }

    fn descend(&mut self, r: usize) {
        let n = self.inst.n();
        if r == n {
            let mu = Matching::from_resident_assignment(&self.resident_choice).expect("search keeps a matching");
            if verify_stability(self.inst, &mu).is_stable() {
                self.found.push(mu);
            }
            return;
        }
        for idx in 0..self.inst.resident_list(r).len() {
            let h = self.inst.resident_list(r)[idx];
            if self.holder[h].is_some() || self.inst.hospital_rank(h, r).is_none() {
                continue;
            }
            self.resident_choice[r] = Some(h);
            self.holder[h] = Some(r);
            if self.consistent_after(r) {
                self.descend(r + 1);
            }
            self.holder[h] = None;
            self.resident_choice[r] = None;
        }
        if self.allow_unmatched && self.consistent_after(r) {
            self.descend(r + 1);
        }
    }
}

/// Enumerates every stable matching of `inst` (full or truncated, n <= 9).
pub fn enumerate_stable(inst: &Instance) -> Result<StableSet> {
    let n = inst.n();
    if n > MAX_ORACLE_N {
        return Err(Error::TooLarge { n, max: MAX_ORACLE_N });
    }
    let mut search = Search {
        inst,
        // balanced complete markets only have perfect stable matchings
        allow_unmatched: !inst.is_full(),
        resident_choice: vec![None; n],
        holder: vec![None; n],
        found: Vec::new(),
    };
    search.descend(0);
    let matchings = search.found;
    if matchings.is_empty() {
        return Err(Error::EmptyStableSet);
    }
    let rank_sum = |m: &Matching, side: Side| -> usize {
        (0..n)
            .filter_map(|a| m.partner(side, a).and_then(|p| inst.ranks(side).rank(a, p)))
            .sum()
    };
    let argmin = |side: Side| -> usize {
        (0..matchings.len()).min_by_key(|&i| (rank_sum(&matchings[i], side), i)).expect("non-empty")
    };
    let resident_optimal = argmin(Side::Residents);
    let hospital_optimal = argmin(Side::Hospitals);
    Ok(StableSet { matchings, resident_optimal, hospital_optimal })
}

/// Sum over matched hospitals of `rho[h] - rank(pruned L(h), M(h))`.
pub fn prediction_distance(pruned: &PrunedInstance<'_>, rho: &[usize], m: &Matching) -> i64 {
    (0..pruned.instance().n())
        .filter_map(|h| {
            let r = m.resident_of(h)?;
            let rank = pruned.instance().hospital_rank(h, r)?;
            Some(rho[h] as i64 - rank as i64)
        })
        .sum()
}

/// The stable matching of the truncated instance closest to the predicted ranks.
/// Ties, which cannot occur between distinct stable matchings, fall back to the
/// lexicographically smallest hospital assignment.
pub fn closest_to_prediction(s: &StableSet, pruned: &PrunedInstance<'_>, rho: &[usize]) -> Result<Matching> {
    s.matchings
        .iter()
        .min_by(|a, b| {
            prediction_distance(pruned, rho, a)
                .cmp(&prediction_distance(pruned, rho, b))
                .then_with(|| a.hospital_assignment().cmp(b.hospital_assignment()))
        })
        .cloned()
        .ok_or(Error::EmptyStableSet)
}
