//! Prediction-driven truncation of hospital lists and the two truncated
//! deferred-acceptance variants.
//!
//! Hospitals are the side that receives predictions. A window prediction keeps
//! the contiguous rank interval `[lo, hi]` of each hospital's list (WDA); a
//! prefix prediction keeps ranks `1..=rho` (PDA). Residents keep, in their
//! original order, exactly the hospitals whose truncated lists still contain
//! them, so the pruned instance is always mutually consistent.

use serde::{Deserialize, Serialize};

use crate::da::{run_da, RunStats};
use crate::error::{Error, Result};
use crate::model::{verify_stability, Instance, Matching, Side, Verdict};

/// Inclusive 1-based rank interval retained on one hospital's list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankWindow {
    pub lo: usize,
    pub hi: usize,
}

impl RankWindow {
    pub fn len(&self) -> usize {
        self.hi + 1 - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, rank: usize) -> bool {
        (self.lo..=self.hi).contains(&rank)
    }
}

/// Per-hospital rank windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionWindow {
    windows: Vec<RankWindow>,
}

impl PredictionWindow {
    /// Windows `[rho - eta, rho + eta]` clamped to `[1, n]`.
    pub fn centered(n: usize, rho: &[usize], eta: &[usize]) -> Result<Self> {
        if rho.len() != n || eta.len() != n {
            return Err(Error::InvalidPrediction(format!(
                "expected {n} predictions, got rho: {}, eta: {}",
                rho.len(),
                eta.len()
            )));
        }
        let windows = rho
            .iter()
            .zip(eta)
            .enumerate()
            .map(|(h, (&rho, &eta))| {
                if !(1..=n).contains(&rho) {
                    return Err(Error::InvalidPrediction(format!("hospital {h}: rho = {rho} outside [1, {n}]")));
                }
                Ok(RankWindow { lo: rho.saturating_sub(eta).max(1), hi: (rho + eta).min(n) })
            })
            .collect::<Result<_>>()?;
        Ok(PredictionWindow { windows })
    }

    /// Windows given directly by their bounds.
    pub fn from_bounds(n: usize, windows: Vec<RankWindow>) -> Result<Self> {
        if windows.len() != n {
            return Err(Error::InvalidPrediction(format!("expected {n} windows, got {}", windows.len())));
        }
        for (h, w) in windows.iter().enumerate() {
            if w.lo < 1 || w.lo > w.hi || w.hi > n {
                return Err(Error::InvalidPrediction(format!(
                    "hospital {h}: window [{}, {}] not inside [1, {n}]",
                    w.lo, w.hi
                )));
            }
        }
        Ok(PredictionWindow { windows })
    }

    /// Windows that keep every list whole.
    pub fn full(n: usize) -> Self {
        PredictionWindow { windows: vec![RankWindow { lo: 1, hi: n }; n] }
    }

    pub fn n(&self) -> usize {
        self.windows.len()
    }

    pub fn windows(&self) -> &[RankWindow] {
        &self.windows
    }

    pub fn get(&self, h: usize) -> RankWindow {
        self.windows[h]
    }

    /// Prefix cutoffs built from the upper bounds only.
    pub fn upper_cutoffs(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.hi).collect()
    }

    /// Largest possible number of proposals by residents on the pruned instance.
    pub fn total_width(&self) -> usize {
        self.windows.iter().map(RankWindow::len).sum()
    }
}

/// A truncated copy of an instance together with the rank interval each
/// hospital kept from its original list.
#[derive(Debug, Clone)]
pub struct PrunedInstance<'a> {
    base: &'a Instance,
    pruned: Instance,
    retained: Vec<RankWindow>,
}

impl<'a> PrunedInstance<'a> {
    fn build(base: &'a Instance, retained: Vec<RankWindow>) -> Self {
        let n = base.n();
        debug_assert_eq!(retained.len(), n);
        let hospital_prefs: Vec<Vec<usize>> = (0..n)
            .map(|h| {
                let list = base.hospital_list(h);
                let w = retained[h];
                let hi = w.hi.min(list.len());
                if w.lo > hi {
                    Vec::new()
                } else {
                    list[w.lo - 1..hi].to_vec()
                }
            })
            .collect();
        let resident_prefs: Vec<Vec<usize>> = (0..n)
            .map(|r| {
                base.resident_list(r)
                    .iter()
                    .copied()
                    .filter(|&h| base.hospital_rank(h, r).is_some_and(|rank| retained[h].contains(rank)))
                    .collect()
            })
            .collect();
        let pruned = Instance::from_validated(n, resident_prefs, hospital_prefs);
        debug_assert!(pruned.check_consistent().is_ok());
        PrunedInstance { base, pruned, retained }
    }

    pub fn base(&self) -> &'a Instance {
        self.base
    }

    pub fn instance(&self) -> &Instance {
        &self.pruned
    }

    pub fn retained(&self) -> &[RankWindow] {
        &self.retained
    }

    /// Sum of truncated hospital list lengths.
    pub fn size(&self) -> usize {
        self.pruned.total_len(Side::Hospitals)
    }

    /// Rank on the original list of the resident at 1-based position `pos` of
    /// `h`'s truncated list.
    pub fn original_rank(&self, h: usize, pos: usize) -> usize {
        self.retained[h].lo + pos - 1
    }
}

/// Keeps `L(h)[lo:hi]` for every hospital.
pub fn prune_window<'a>(inst: &'a Instance, pred: &PredictionWindow) -> PrunedInstance<'a> {
    assert_eq!(pred.n(), inst.n(), "prediction and instance sizes differ");
    PrunedInstance::build(inst, pred.windows.clone())
}

/// Keeps `L(h)[1:rho]` for every hospital.
pub fn prune_prefix<'a>(inst: &'a Instance, rho: &[usize]) -> Result<PrunedInstance<'a>> {
    let n = inst.n();
    validate_cutoffs(n, rho)?;
    Ok(PrunedInstance::build(inst, rho.iter().map(|&hi| RankWindow { lo: 1, hi }).collect()))
}

fn validate_cutoffs(n: usize, rho: &[usize]) -> Result<()> {
    if rho.len() != n {
        return Err(Error::InvalidPrediction(format!("expected {n} cutoffs, got {}", rho.len())));
    }
    if let Some((h, &c)) = rho.iter().enumerate().find(|(_, &c)| !(1..=n).contains(&c)) {
        return Err(Error::InvalidPrediction(format!("hospital {h}: cutoff {c} outside [1, {n}]")));
    }
    Ok(())
}

/// Result of one WDA execution; the verdict is always against the original instance.
#[derive(Debug, Clone)]
pub struct WdaOutcome {
    pub matching: Matching,
    pub stats: RunStats,
    pub verdict: Verdict,
    pub perfect: bool,
    pub instance_size: usize,
}

/// Window-truncated deferred acceptance. The output is reported as is: an
/// unstable or imperfect matching is never repaired.
pub fn run_wda(inst: &Instance, pred: &PredictionWindow, proposer_side: Side) -> WdaOutcome {
    let pruned = prune_window(inst, pred);
    let (matching, stats) = run_da(pruned.instance(), proposer_side);
    let verdict = verify_stability(inst, &matching);
    let perfect = matching.is_perfect();
    WdaOutcome { matching, stats, verdict, perfect, instance_size: pruned.size() }
}

/// Result of a single PDA round.
#[derive(Debug, Clone)]
pub struct PdaRound {
    pub matching: Matching,
    pub stats: RunStats,
    /// Hospitals left unmatched; each one is under-predicted.
    pub unmatched_hospitals: Vec<usize>,
    pub instance_size: usize,
}

/// Prefix-truncated deferred acceptance, residents proposing.
pub fn run_pda_once(inst: &Instance, rho: &[usize]) -> Result<PdaRound> {
    let pruned = prune_prefix(inst, rho)?;
    Ok(pda_round(&pruned))
}

fn pda_round(pruned: &PrunedInstance<'_>) -> PdaRound {
    let (matching, stats) = run_da(pruned.instance(), Side::Residents);
    let unmatched_hospitals = matching.unmatched(Side::Hospitals);
    PdaRound { matching, stats, unmatched_hospitals, instance_size: pruned.size() }
}

/// Result of the adaptive PDA loop.
#[derive(Debug, Clone)]
pub struct PdaOutcome {
    pub matching: Matching,
    /// Proposals summed over all rounds; `iterations` counts DA rounds inside
    /// the final run only.
    pub stats: RunStats,
    /// Number of truncated DA runs, including the first.
    pub rounds: usize,
    /// Sum over rounds of the total truncated hospital list length.
    pub instance_size: usize,
    pub final_cutoffs: Vec<usize>,
    pub verdict: Verdict,
}

/// Reruns PDA, extending only the cutoffs of unmatched hospitals, until the
/// matching is perfect. The extension starts at `initial_extension` and is
/// multiplied by `growth` after every round.
pub fn run_pda_adaptive(inst: &Instance, rho: &[usize], initial_extension: usize, growth: usize) -> Result<PdaOutcome> {
    let n = inst.n();
    validate_cutoffs(n, rho)?;
    if initial_extension < 1 {
        return Err(Error::InvalidParams("initial extension must be at least 1".into()));
    }
    if growth < 1 {
        return Err(Error::InvalidParams("growth factor must be at least 1".into()));
    }

    let mut cutoffs = rho.to_vec();
    let mut extension = initial_extension;
    let mut proposals = 0u64;
    let mut instance_size = 0usize;
    let mut rounds = 0usize;
    loop {
        let pruned = prune_prefix(inst, &cutoffs)?;
        let round = pda_round(&pruned);
        rounds += 1;
        proposals += round.stats.proposals;
        instance_size += round.instance_size;
        if round.unmatched_hospitals.is_empty() {
            let verdict = verify_stability(inst, &round.matching);
            let stats = RunStats { proposals, ..round.stats };
            return Ok(PdaOutcome {
                matching: round.matching,
                stats,
                rounds,
                instance_size,
                final_cutoffs: cutoffs,
                verdict,
            });
        }
        let mut extended = false;
        for &h in &round.unmatched_hospitals {
            let next = (cutoffs[h] + extension).min(n);
            extended |= next != cutoffs[h];
            cutoffs[h] = next;
        }
        // An unmatched hospital is under-predicted, so its cutoff is below n.
        assert!(extended, "unmatched hospitals already keep their full lists");
        extension = extension.saturating_mul(growth);
    }
}
