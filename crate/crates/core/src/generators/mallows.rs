//! Mallows rankings drawn with the repeated-insertion model.
//!
//! Reference items are inserted one at a time; the item inserted at step `k`
//! (with `k` items already placed) lands at position `j` with probability
//! proportional to `phi^(k - j)`, i.e. it creates `k - j` inversions with
//! probability proportional to `phi^(k - j)`. The resulting ranking has
//! probability proportional to `phi^d` where `d` is its Kendall-tau distance
//! to the reference.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Instance;

use super::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MallowsParams {
    pub n: usize,
    pub phi: f64,
    /// Reference ranking of hospitals, used for every resident's list.
    pub resident_reference: Vec<usize>,
    /// Reference ranking of residents, used for every hospital's list.
    pub hospital_reference: Vec<usize>,
}

impl MallowsParams {
    /// Identity reference rankings on both sides.
    pub fn new(n: usize, phi: f64) -> Result<Self> {
        Self::with_references(phi, (0..n).collect(), (0..n).collect())
    }

    pub fn with_references(phi: f64, resident_reference: Vec<usize>, hospital_reference: Vec<usize>) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidParams(format!("Mallows dispersion {phi} outside [0, 1]")));
        }
        let n = resident_reference.len();
        if n == 0 {
            return Err(Error::EmptyMarket);
        }
        for reference in [&resident_reference, &hospital_reference] {
            let mut seen = vec![false; n];
            if reference.len() != n || !reference.iter().all(|&a| a < n && !std::mem::replace(&mut seen[a], true)) {
                return Err(Error::InvalidParams("reference ranking is not a permutation".into()));
            }
        }
        Ok(MallowsParams { n, phi, resident_reference, hospital_reference })
    }
}

/// Inversion count `d` in `0..=k` for one insertion step, drawn by inverting
/// the truncated geometric CDF `P(d) ~ phi^d` at `u` in `[0, 1)`.
pub fn insertion_offset(u: f64, k: usize, phi: f64) -> usize {
    if phi <= 0.0 {
        return 0;
    }
    if phi >= 1.0 {
        return ((u * (k + 1) as f64) as usize).min(k);
    }
    let tail = phi.powi(k as i32 + 1);
    let t = 1.0 - u * (1.0 - tail);
    let d = (t.ln() / phi.ln()).floor();
    if d.is_finite() && d > 0.0 {
        (d as usize).min(k)
    } else {
        0
    }
}

/// One ranking from Mallows(`reference`, `phi`).
pub fn sample_mallows_ranking<R: Rng + ?Sized>(rng: &mut R, reference: &[usize], phi: f64) -> Vec<usize> {
    let mut ranking = Vec::with_capacity(reference.len());
    for (k, &item) in reference.iter().enumerate() {
        let d = insertion_offset(rng.random::<f64>(), k, phi);
        ranking.insert(k - d, item);
    }
    ranking
}

/// Every agent's list is an independent Mallows draw around its side's reference.
pub fn sample_mallows(p: &MallowsParams, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let residents = (0..p.n).map(|_| sample_mallows_ranking(&mut rng, &p.resident_reference, p.phi)).collect();
    let hospitals = (0..p.n).map(|_| sample_mallows_ranking(&mut rng, &p.hospital_reference, p.phi)).collect();
    Instance::from_validated(p.n, residents, hospitals)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn kendall_tau(a: &[usize], reference: &[usize]) -> usize {
        let mut pos = vec![0; reference.len()];
        for (i, &x) in reference.iter().enumerate() {
            pos[x] = i;
        }
        let mapped: Vec<usize> = a.iter().map(|&x| pos[x]).collect();
        let mut inv = 0;
        for i in 0..mapped.len() {
            for j in i + 1..mapped.len() {
                if mapped[i] > mapped[j] {
                    inv += 1;
                }
            }
        }
        inv
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Exact Mallows probabilities by enumerating Kendall-tau distances.
    fn mallows_pmf(n: usize, phi: f64) -> HashMap<Vec<usize>, f64> {
        let reference: Vec<usize> = (0..n).collect();
        let weights: Vec<(Vec<usize>, f64)> =
            permutations(n).into_iter().map(|p| {
                let d = kendall_tau(&p, &reference);
                (p, phi.powi(d as i32))
            }).collect();
        let z: f64 = weights.iter().map(|(_, w)| w).sum();
        weights.into_iter().map(|(p, w)| (p, w / z)).collect()
    }

    #[test]
    fn zero_dispersion_returns_reference() {
        let inst = sample_mallows(&MallowsParams::new(5, 0.0).unwrap(), 3);
        for a in 0..5 {
            assert_eq!(inst.resident_list(a), &[0, 1, 2, 3, 4]);
            assert_eq!(inst.hospital_list(a), &[0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn custom_reference_with_zero_dispersion() {
        let p = MallowsParams::with_references(0.0, vec![2, 0, 1], vec![1, 2, 0]).unwrap();
        let inst = sample_mallows(&p, 1);
        assert_eq!(inst.resident_list(1), &[2, 0, 1]);
        assert_eq!(inst.hospital_list(2), &[1, 2, 0]);
        assert!(MallowsParams::with_references(0.5, vec![0, 0], vec![0, 1]).is_err());
        assert!(MallowsParams::new(3, 1.5).is_err());
    }

    #[test]
    fn closed_form_for_three_items() {
        // Z(0.5) over S_3 = 1 + 2(0.5) + 2(0.25) + 0.125 = 2.625
        let pmf = mallows_pmf(3, 0.5);
        assert!((pmf[&vec![0, 1, 2]] - 1.0 / 2.625).abs() < 1e-12);
    }

    /// Pushes a fine uniform grid of `u` through the insertion step and checks
    /// the induced offset distribution against `phi^d / sum_t phi^t`.
    #[test]
    fn insertion_step_probabilities() {
        let grid = 200_000;
        for &phi in &[0.0f64, 0.3, 0.5, 0.9, 1.0] {
            for k in 0..4 {
                let mut counts = vec![0usize; k + 1];
                for i in 0..grid {
                    let u = (i as f64 + 0.5) / grid as f64;
                    counts[insertion_offset(u, k, phi)] += 1;
                }
                let z: f64 = (0..=k).map(|t| phi.powi(t as i32)).sum();
                for (d, &c) in counts.iter().enumerate() {
                    let expected = phi.powi(d as i32) / z;
                    assert!((c as f64 / grid as f64 - expected).abs() < 1e-4, "phi={phi} k={k} d={d}");
                }
            }
        }
    }

    /// Propagates the exact insertion-step distribution through every insertion
    /// sequence and compares with the Kendall-tau pmf, for n <= 4.
    #[test]
    fn insertion_model_matches_mallows_pmf() {
        for &phi in &[0.2f64, 0.5, 0.8] {
            for n in 1..=4 {
                let mut dist: HashMap<Vec<usize>, f64> = HashMap::from([(vec![], 1.0)]);
                for k in 0..n {
                    let z: f64 = (0..=k).map(|t| phi.powi(t as i32)).sum();
                    let mut next = HashMap::new();
                    for (partial, p) in &dist {
                        for d in 0..=k {
                            let mut q = partial.clone();
                            q.insert(k - d, k);
                            *next.entry(q).or_insert(0.0) += p * phi.powi(d as i32) / z;
                        }
                    }
                    dist = next;
                }
                let pmf = mallows_pmf(n, phi);
                assert_eq!(dist.len(), pmf.len());
                for (perm, p) in &pmf {
                    assert!((dist[perm] - p).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn empirical_reference_frequency() {
        let mut rng = rng_from_seed(99);
        let reference = [0, 1, 2];
        let draws = 50_000;
        let hits = (0..draws).filter(|_| sample_mallows_ranking(&mut rng, &reference, 0.5) == reference).count();
        assert!((hits as f64 / draws as f64 - 1.0 / 2.625).abs() < 0.02);
    }

    #[test]
    fn uniform_when_phi_is_one() {
        let mut rng = rng_from_seed(5);
        let reference = [0, 1, 2, 3];
        let draws = 10_000;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(sample_mallows_ranking(&mut rng, &reference, 1.0)).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 23 degrees of freedom, 99.9% quantile
        assert!(chi2 < 49.73, "chi2 = {chi2}");
    }

    #[test]
    fn seeded_determinism() {
        let p = MallowsParams::new(30, 0.7).unwrap();
        let a = sample_mallows(&p, 17);
        assert!(a.is_full());
        assert_eq!(a, sample_mallows(&p, 17));
    }
}
