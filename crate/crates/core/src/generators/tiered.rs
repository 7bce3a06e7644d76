use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;

use super::rng_from_seed;

/// Tier structure shared by both sides: agents are split into consecutive
/// index blocks by `fractions`, and each tier's agents carry its `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierParams {
    pub fractions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Default for TierParams {
    fn default() -> Self {
        TierParams { fractions: vec![0.1, 0.2, 0.4, 0.2, 0.1], weights: vec![50.0, 25.0, 10.0, 5.0, 1.0] }
    }
}

impl TierParams {
    pub fn new(fractions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let p = TierParams { fractions, weights };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() || self.fractions.len() != self.weights.len() {
            return Err(Error::InvalidParams("tier fractions and weights must be non-empty and equally long".into()));
        }
        if self.fractions.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidParams("tier fractions must be non-negative".into()));
        }
        let total: f64 = self.fractions.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("tier fractions sum to {total}, expected 1")));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidParams("tier weights must be positive".into()));
        }
        Ok(())
    }

    /// `floor(fraction * n)` agents per tier; the leftover goes to the tier with
    /// the largest fraction (the first one on ties).
    pub fn tier_sizes(&self, n: usize) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.fractions.iter().map(|f| (f * n as f64).floor() as usize).collect();
        let assigned: usize = sizes.iter().sum();
        let largest = self
            .fractions
            .iter()
            .enumerate()
            .fold(0, |best, (i, f)| if *f > self.fractions[best] { i } else { best });
        sizes[largest] += n.saturating_sub(assigned);
        sizes
    }

    /// Weight of every agent `0..n`, tiers laid out in index order.
    pub fn agent_weights(&self, n: usize) -> Vec<f64> {
        self.tier_sizes(n)
            .into_iter()
            .zip(&self.weights)
            .flat_map(|(size, &w)| std::iter::repeat_n(w, size))
            .collect()
    }

    /// Tier of every agent `0..n`.
    pub fn agent_tiers(&self, n: usize) -> Vec<usize> {
        self.tier_sizes(n).into_iter().enumerate().flat_map(|(t, size)| std::iter::repeat_n(t, size)).collect()
    }
}

/// Weighted sampling without replacement (Plackett-Luce) over `weights`.
///
/// Sorting by exponential keys `E_i / w_i` is equivalent to repeatedly drawing
/// the next candidate with probability proportional to its weight.
pub fn sample_tiered_ranking<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u = 1.0 - rng.random::<f64>();
            (-u.ln() / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, i)| i).collect()
}

pub fn sample_tiered(n: usize, p: &TierParams, seed: u64) -> Instance {
    let weights = p.agent_weights(n);
    let mut rng = rng_from_seed(seed);
    let residents = (0..n).map(|_| sample_tiered_ranking(&mut rng, &weights)).collect();
    let hospitals = (0..n).map(|_| sample_tiered_ranking(&mut rng, &weights)).collect();
    Instance::from_validated(n, residents, hospitals)
}
