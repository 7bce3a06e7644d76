//! Rating-table market: every resident/hospital pair draws a pair of coarse
//! ratings from a joint 10x10 table, agents rank by rating with a popularity
//! tie-break and a small jitter, and both sides are finally relabeled so that
//! lower indices are more popular.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;

use super::rng_from_seed;

pub const RATING_LEVELS: usize = 10;

const DEFAULT_TABLE: &str = include_str!("../../data/rating_table.toml");

/// Joint distribution over (resident's rating of hospital, hospital's rating
/// of resident), plus the tie-break constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTable {
    pub popularity_weight: f64,
    pub jitter: f64,
    pub table: Vec<Vec<f64>>,
}

impl Default for RatingTable {
    fn default() -> Self {
        RatingTable::from_toml_str(DEFAULT_TABLE).expect("shipped rating table is valid")
    }
}

impl RatingTable {
    /// Validates the shape and sign of the table and normalizes it to sum to 1.
    pub fn new(table: Vec<Vec<f64>>, popularity_weight: f64, jitter: f64) -> Result<Self> {
        if table.len() != RATING_LEVELS || table.iter().any(|row| row.len() != RATING_LEVELS) {
            return Err(Error::InvalidParams(format!("rating table must be {RATING_LEVELS}x{RATING_LEVELS}")));
        }
        if table.iter().flatten().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParams("rating table entries must be finite and non-negative".into()));
        }
        let total: f64 = table.iter().flatten().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParams("rating table has no mass".into()));
        }
        if !(popularity_weight.is_finite() && popularity_weight >= 0.0 && jitter.is_finite() && jitter >= 0.0) {
            return Err(Error::InvalidParams("tie-break constants must be non-negative".into()));
        }
        let table = table.into_iter().map(|row| row.into_iter().map(|p| p / total).collect()).collect();
        Ok(RatingTable { popularity_weight, jitter, table })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RatingTable =
            toml::from_str(text).map_err(|e| Error::InvalidParams(format!("rating table config: {e}")))?;
        RatingTable::new(raw.table, raw.popularity_weight, raw.jitter)
    }

    /// All mass on a single `(resident rating, hospital rating)` cell, ratings 1-based.
    pub fn point_mass(resident_rating: usize, hospital_rating: usize) -> Result<Self> {
        let mut table = vec![vec![0.0; RATING_LEVELS]; RATING_LEVELS];
        table[resident_rating - 1][hospital_rating - 1] = 1.0;
        RatingTable::new(table, 0.05, 0.01)
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.table
            .iter()
            .flatten()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Sampled ratings, 1-based levels. `resident_ratings[r][h]` is `r`'s rating of
/// `h`; `hospital_ratings[h][r]` is `h`'s rating of `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrices {
    pub resident_ratings: Vec<Vec<u8>>,
    pub hospital_ratings: Vec<Vec<u8>>,
}

fn draw_ratings<R: Rng + ?Sized>(rng: &mut R, n: usize, t: &RatingTable) -> RatingMatrices {
    let cdf = t.cumulative();
    let mut resident_ratings = vec![vec![0u8; n]; n];
    let mut hospital_ratings = vec![vec![0u8; n]; n];
    for r in 0..n {
        for h in 0..n {
            let u = rng.random::<f64>() * cdf[cdf.len() - 1];
            let cell = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            resident_ratings[r][h] = (cell / RATING_LEVELS + 1) as u8;
            hospital_ratings[h][r] = (cell % RATING_LEVELS + 1) as u8;
        }
    }
    RatingMatrices { resident_ratings, hospital_ratings }
}

pub fn sample_ratings(n: usize, t: &RatingTable, seed: u64) -> RatingMatrices {
    draw_ratings(&mut rng_from_seed(seed), n, t)
}

/// Mean rating each agent receives from the other side.
fn popularity(received: &[Vec<u8>], n: usize) -> Vec<f64> {
    let mut totals = vec![0.0; n];
    for row in received {
        for (target, &rating) in row.iter().enumerate() {
            totals[target] += rating as f64;
        }
    }
    totals.into_iter().map(|t| t / n as f64).collect()
}

fn normalized(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; values.len()]
    }
}

fn rank_by_score<R: Rng + ?Sized>(rng: &mut R, ratings: &[u8], norm_pop: &[f64], t: &RatingTable) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = ratings
        .iter()
        .enumerate()
        .map(|(c, &rating)| {
            (rating as f64 + t.popularity_weight * norm_pop[c] + t.jitter * rng.random::<f64>(), c)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, c)| c).collect()
}

/// Indices sorted by decreasing popularity; `order[new] = old`.
fn popularity_order(pop: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[b].total_cmp(&pop[a]).then(a.cmp(&b)));
    order
}

pub fn sample_rating_market(n: usize, t: &RatingTable, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let ratings = draw_ratings(&mut rng, n, t);
    let hospital_pop = popularity(&ratings.resident_ratings, n);
    let resident_pop = popularity(&ratings.hospital_ratings, n);
    let hospital_norm = normalized(&hospital_pop);
    let resident_norm = normalized(&resident_pop);

    let resident_lists: Vec<Vec<usize>> =
        ratings.resident_ratings.iter().map(|row| rank_by_score(&mut rng, row, &hospital_norm, t)).collect();
    let hospital_lists: Vec<Vec<usize>> =
        ratings.hospital_ratings.iter().map(|row| rank_by_score(&mut rng, row, &resident_norm, t)).collect();

    let resident_order = popularity_order(&resident_pop);
    let hospital_order = popularity_order(&hospital_pop);
    let mut resident_label = vec![0; n];
    for (new, &old) in resident_order.iter().enumerate() {
        resident_label[old] = new;
    }
    let mut hospital_label = vec![0; n];
    for (new, &old) in hospital_order.iter().enumerate() {
        hospital_label[old] = new;
    }
    let residents =
        resident_order.iter().map(|&old| resident_lists[old].iter().map(|&h| hospital_label[h]).collect()).collect();
    let hospitals =
        hospital_order.iter().map(|&old| hospital_lists[old].iter().map(|&r| resident_label[r]).collect()).collect();
    Instance::from_validated(n, residents, hospitals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Side;

    #[test]
    fn shipped_table_is_normalized() {
        let t = RatingTable::default();
        let total: f64 = t.table.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(t.popularity_weight, 0.05);
        assert_eq!(t.jitter, 0.01);
    }

    #[test]
    fn malformed_tables_rejected() {
        assert!(RatingTable::new(vec![vec![1.0; 10]; 9], 0.05, 0.01).is_err());
        let mut t = vec![vec![0.1; 10]; 10];
        t[3][3] = -0.1;
        assert!(RatingTable::new(t, 0.05, 0.01).is_err());
        assert!(RatingTable::new(vec![vec![0.0; 10]; 10], 0.05, 0.01).is_err());
        assert!(RatingTable::from_toml_str("table = 3").is_err());
    }

    #[test]
    fn all_ties_still_give_strict_lists() {
        let t = RatingTable::point_mass(10, 10).unwrap();
        let inst = sample_rating_market(30, &t, 4);
        assert!(inst.is_full());
        let m = sample_ratings(30, &t, 4);
        assert!(m.resident_ratings.iter().flatten().all(|&r| r == 10));
    }

    #[test]
    fn diagonal_table_gives_transposed_ratings() {
        let mut table = vec![vec![0.0; 10]; 10];
        for (i, row) in table.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let t = RatingTable::new(table, 0.05, 0.01).unwrap();
        let m = sample_ratings(25, &t, 8);
        for r in 0..25 {
            for h in 0..25 {
                assert_eq!(m.resident_ratings[r][h], m.hospital_ratings[h][r]);
            }
        }
    }

    #[test]
    fn popular_agents_get_more_first_place_votes() {
        let t = RatingTable::default();
        let n = 50;
        for side in [Side::Residents, Side::Hospitals] {
            let (mut first, mut last) = (0, 0);
            for seed in 0..100 {
                let inst = sample_rating_market(n, &t, seed);
                for list in inst.prefs(side.other()) {
                    if list[0] == 0 {
                        first += 1;
                    }
                    if list[0] == n - 1 {
                        last += 1;
                    }
                }
            }
            assert!(first >= last, "{side}: {first} < {last}");
        }
    }

    #[test]
    fn seeded_determinism() {
        let t = RatingTable::default();
        assert_eq!(sample_rating_market(20, &t, 3), sample_rating_market(20, &t, 3));
    }
}
