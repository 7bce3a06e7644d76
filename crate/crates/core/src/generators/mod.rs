//! Random market models and the fixed Figure 1 counterexample.
//!
//! Every sampler is a pure function of its parameters and a `u64` seed.

mod mallows;
mod rating;
mod tiered;

pub use mallows::{insertion_offset, sample_mallows, sample_mallows_ranking, MallowsParams};
pub use rating::{sample_rating_market, sample_ratings, RatingMatrices, RatingTable, RATING_LEVELS};
pub use tiered::{sample_tiered, sample_tiered_ranking, TierParams};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, Matching};
use crate::truncation::PredictionWindow;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random full preference lists on both sides.
pub fn sample_uniform(n: usize, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let mut side = || -> Vec<Vec<usize>> {
        (0..n)
            .map(|_| {
                let mut list: Vec<usize> = (0..n).collect();
                list.shuffle(&mut rng);
                list
            })
            .collect()
    };
    let residents = side();
    let hospitals = side();
    Instance::from_validated(n, residents, hospitals)
}

/// The 4x4 counterexample on which hospital-proposing window truncation is
/// unstable, with its unique stable matching and the windows `rho = (2,3,1,2)`,
/// `eta = 1`.
pub fn figure1_instance() -> (Instance, Matching, PredictionWindow) {
    let residents = vec![vec![0, 3, 1, 2], vec![3, 2, 0, 1], vec![0, 2, 1, 3], vec![0, 3, 1, 2]];
    let hospitals = vec![vec![1, 2, 0, 3], vec![2, 1, 0, 3], vec![3, 0, 2, 1], vec![2, 1, 3, 0]];
    let inst = Instance::new(residents, hospitals).expect("figure 1 lists are valid");
    let mu = Matching::from_pairs(4, [(0, 1), (1, 3), (2, 0), (3, 2)]).expect("valid matching");
    let pred = PredictionWindow::centered(4, &[2, 3, 1, 2], &[1, 1, 1, 1]).expect("valid windows");
    (inst, mu, pred)
}

/// A market distribution the experiment pipeline can draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum MarketModel {
    Uniform,
    Mallows { phi: f64 },
    Tiered(TierParams),
    Rating(RatingTable),
}

impl MarketModel {
    pub fn name(&self) -> &'static str {
        match self {
            MarketModel::Uniform => "uniform",
            MarketModel::Mallows { .. } => "mallows",
            MarketModel::Tiered(_) => "tiered",
            MarketModel::Rating(_) => "rating",
        }
    }

    /// Draws one full instance of size `n`.
    pub fn sample(&self, n: usize, seed: u64) -> crate::Result<Instance> {
        Ok(match self {
            MarketModel::Uniform => sample_uniform(n, seed),
            MarketModel::Mallows { phi } => sample_mallows(&MallowsParams::new(n, *phi)?, seed),
            MarketModel::Tiered(params) => sample_tiered(n, params, seed),
            MarketModel::Rating(table) => sample_rating_market(n, table, seed),
        })
    }
}
