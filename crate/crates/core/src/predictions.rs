//! Rank windows learned from historical market outcomes.
//!
//! For each receiving agent the learner records the rank of its partner in the
//! proposer-optimal matching of `k` training markets and predicts
//! `[floor(min - 3 sd), ceil(max + 3 sd)]`, clamped to `[1, n]`, where `sd` is
//! the sample standard deviation (denominator `k - 1`) of the observed ranks.

use rayon::prelude::*;

use crate::da::run_da;
use crate::error::{Error, Result};
use crate::model::{Instance, Side};
use crate::truncation::{PredictionWindow, RankWindow};

/// Width of the learned window on each side, in standard deviations.
pub const SIGMA_MULTIPLIER: f64 = 3.0;
pub const SIGMA_CONVENTION: &str = "sample standard deviation (k - 1 denominator)";
pub const ROUNDING_CONVENTION: &str = "lower bound floored, upper bound ceiled, both clamped to [1, n]";

/// Observed match ranks per receiving agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingLog {
    n: usize,
    receiver_side: Side,
    ranks: Vec<Vec<usize>>,
}

impl TrainingLog {
    /// `ranks[a]` lists the ranks observed for receiver `a`, one per training market.
    pub fn from_ranks(n: usize, receiver_side: Side, ranks: Vec<Vec<usize>>) -> Result<Self> {
        if ranks.len() != n {
            return Err(Error::InvalidLog(format!("expected {n} receivers, got {}", ranks.len())));
        }
        let k = ranks.first().map_or(0, Vec::len);
        for (a, log) in ranks.iter().enumerate() {
            if log.is_empty() {
                return Err(Error::InvalidLog(format!("receiver {a} has no observations")));
            }
            if log.len() != k {
                return Err(Error::InvalidLog(format!("receiver {a} has {} observations, expected {k}", log.len())));
            }
            if let Some(&bad) = log.iter().find(|&&r| !(1..=n).contains(&r)) {
                return Err(Error::InvalidLog(format!("receiver {a}: rank {bad} outside [1, {n}]")));
            }
        }
        Ok(TrainingLog { n, receiver_side, ranks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn receiver_side(&self) -> Side {
        self.receiver_side
    }

    pub fn ranks(&self) -> &[Vec<usize>] {
        &self.ranks
    }

    /// Number of training markets.
    pub fn k(&self) -> usize {
        self.ranks[0].len()
    }
}

/// Runs proposer-side deferred acceptance on `k` fresh markets (seeds `seed ^ i`)
/// and logs each receiver's rank of its partner on its own full list.
pub fn train<F>(sampler: F, k: usize, proposer_side: Side, seed: u64) -> Result<TrainingLog>
where
    F: Fn(u64) -> Result<Instance> + Sync,
{
    if k < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 training markets, got {k}")));
    }
    let receiver_side = proposer_side.other();
    let per_market: Vec<Vec<usize>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let inst = sampler(seed ^ i as u64)?;
            let (mu, _) = run_da(&inst, proposer_side);
            (0..inst.n())
                .map(|a| {
                    mu.partner(receiver_side, a)
                        .and_then(|p| inst.ranks(receiver_side).rank(a, p))
                        .ok_or_else(|| Error::InvalidLog(format!("{receiver_side} {a} unmatched in training market {i}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = per_market[0].len();
    if per_market.iter().any(|m| m.len() != n) {
        return Err(Error::InvalidLog("training markets differ in size".into()));
    }
    let ranks = (0..n).map(|a| per_market.iter().map(|m| m[a]).collect()).collect();
    TrainingLog::from_ranks(n, receiver_side, ranks)
}

/// Sample standard deviation; zero for a single observation.
pub fn sample_std(values: &[usize]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<usize>() as f64 / k;
    let ss: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    (ss / (k - 1.0)).sqrt()
}

/// Window for one receiver's rank log.
pub fn window_for(log: &[usize], n: usize) -> Result<RankWindow> {
    let (Some(&min), Some(&max)) = (log.iter().min(), log.iter().max()) else {
        return Err(Error::InvalidLog("empty rank log".into()));
    };
    let spread = SIGMA_MULTIPLIER * sample_std(log);
    let lo = (min as f64 - spread).floor().max(1.0) as usize;
    let hi = ((max as f64 + spread).ceil() as usize).clamp(1, n);
    Ok(RankWindow { lo: lo.min(n), hi })
}

pub fn learn_windows(log: &TrainingLog) -> Result<PredictionWindow> {
    let windows = log.ranks.iter().map(|l| window_for(l, log.n)).collect::<Result<_>>()?;
    PredictionWindow::from_bounds(log.n, windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{figure1_instance, sample_mallows, sample_uniform, MallowsParams};
    use crate::truncation::run_wda;

    #[test]
    fn constant_log_gives_point_window() {
        assert_eq!(window_for(&[5, 5, 5], 10).unwrap(), RankWindow { lo: 5, hi: 5 });
    }

    #[test]
    fn three_sigma_bounds() {
        assert_eq!(sample_std(&[4, 5, 6]), 1.0);
        assert_eq!(window_for(&[4, 5, 6], 20).unwrap(), RankWindow { lo: 1, hi: 9 });
        // min - 3sd = 1 - 3 < 1
        assert_eq!(window_for(&[1, 2, 3], 20).unwrap().lo, 1);
        assert_eq!(window_for(&[7, 8, 9], 10).unwrap().hi, 10);
        assert!(window_for(&[], 5).is_err());
    }

    #[test]
    fn log_validation() {
        assert!(TrainingLog::from_ranks(2, Side::Hospitals, vec![vec![1], vec![]]).is_err());
        assert!(TrainingLog::from_ranks(2, Side::Hospitals, vec![vec![1], vec![1, 2]]).is_err());
        assert!(TrainingLog::from_ranks(2, Side::Hospitals, vec![vec![3], vec![1]]).is_err());
        assert!(TrainingLog::from_ranks(1, Side::Hospitals, vec![vec![1], vec![1]]).is_err());
    }

    #[test]
    fn training_needs_two_markets() {
        assert!(train(|s| Ok(sample_uniform(5, s)), 1, Side::Residents, 0).is_err());
    }

    #[test]
    fn point_mass_market_logs_figure1_ranks() {
        let log = train(|_| Ok(figure1_instance().0), 6, Side::Residents, 0).unwrap();
        assert_eq!(log.receiver_side(), Side::Hospitals);
        for (h, expected) in [2, 3, 1, 2].into_iter().enumerate() {
            assert_eq!(log.ranks()[h], vec![expected; 6]);
        }
    }

    #[test]
    fn zero_dispersion_logs_are_constant_and_wda_is_linear() {
        let n = 12;
        let p = MallowsParams::new(n, 0.0).unwrap();
        let log = train(|s| Ok(sample_mallows(&p, s)), 5, Side::Residents, 42).unwrap();
        assert!(log.ranks().iter().all(|l| l.iter().all(|&r| r == l[0])));
        let windows = learn_windows(&log).unwrap();
        let inst = sample_mallows(&p, 1234);
        let out = run_wda(&inst, &windows, Side::Residents);
        assert_eq!(out.stats.proposals, n as u64);
        assert!(out.verdict.is_stable());
    }

    #[test]
    fn uniform_training_shape() {
        let log = train(|s| Ok(sample_uniform(100, s)), 50, Side::Residents, 1).unwrap();
        assert_eq!(log.ranks().len(), 100);
        assert!(log.ranks().iter().all(|l| l.len() == 50));
        assert_eq!(log.k(), 50);
    }

    #[test]
    fn observed_ranks_fall_inside_learned_windows() {
        let log = train(|s| Ok(sample_uniform(30, s)), 8, Side::Hospitals, 3).unwrap();
        let windows = learn_windows(&log).unwrap();
        for (a, l) in log.ranks().iter().enumerate() {
            let w = windows.get(a);
            assert!(w.lo <= w.hi);
            assert!(l.iter().all(|&r| w.contains(r)));
        }
    }
}
