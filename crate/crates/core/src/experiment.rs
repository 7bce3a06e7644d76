//! The train-then-evaluate pipeline comparing DA, WDA and PDA on sampled markets.
//!
//! For every sweep value the pipeline draws `k_train` markets, learns rank
//! windows for the receiving side, then draws `k_eval` fresh markets and runs
//! classic DA, WDA on the learned windows and adaptive PDA on the windows'
//! upper bounds. The proposing side is always presented to the algorithms as
//! the resident side; hospital-proposing experiments transpose every market.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::da::run_da;
use crate::error::{Error, Result};
use crate::generators::MarketModel;
use crate::io::write_json_pretty;
use crate::model::{Instance, Side};
use crate::plot::{render_band_plot, Series};
use crate::predictions::{learn_windows, train, ROUNDING_CONVENTION, SIGMA_CONVENTION, SIGMA_MULTIPLIER};
use crate::truncation::{run_pda_adaptive, run_wda, PredictionWindow};

pub const PDA_GROWTH: usize = 2;

/// First PDA extension: `floor(n / 8)`, at least 1.
pub fn pda_initial_extension(n: usize) -> usize {
    (n / 8).max(1)
}

/// The quantity varied across the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "lowercase")]
pub enum Sweep {
    /// Mallows dispersion values at fixed `n`.
    Phi(Vec<f64>),
    /// Market sizes.
    N(Vec<usize>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::Phi(v) => v.len(),
            Sweep::N(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_name(&self) -> &'static str {
        match self {
            Sweep::Phi(_) => "phi",
            Sweep::N(_) => "n",
        }
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            Sweep::Phi(v) => v[i],
            Sweep::N(v) => v[i] as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: MarketModel,
    /// Market size when sweeping over `phi`; ignored for `n` sweeps.
    pub n: usize,
    pub sweep: Sweep,
    pub k_train: usize,
    pub k_eval: usize,
    pub proposer: Side,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Mallows sweep over `phis` at size `n` with 50 training and 50 evaluation markets.
    pub fn mallows(n: usize, phis: Vec<f64>, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            model: MarketModel::Mallows { phi: phis.first().copied().unwrap_or(0.5) },
            n,
            sweep: Sweep::Phi(phis),
            k_train: 50,
            k_eval: 50,
            proposer: Side::Residents,
            seed,
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_train < 2 {
            return Err(Error::InvalidParams(format!("k_train must be at least 2, got {}", self.k_train)));
        }
        if self.k_eval < 1 {
            return Err(Error::InvalidParams("k_eval must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidParams("sweep has no values".into()));
        }
        match &self.sweep {
            Sweep::Phi(phis) => {
                if !matches!(self.model, MarketModel::Mallows { .. }) {
                    return Err(Error::InvalidParams(format!("a phi sweep needs the mallows model, got {}", self.model.name())));
                }
                if let Some(bad) = phis.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::InvalidParams(format!("phi {bad} outside [0, 1]")));
                }
                if self.n == 0 {
                    return Err(Error::EmptyMarket);
                }
            }
            Sweep::N(ns) => {
                if ns.contains(&0) {
                    return Err(Error::EmptyMarket);
                }
            }
        }
        Ok(())
    }

    fn point(&self, i: usize) -> (MarketModel, usize) {
        match &self.sweep {
            Sweep::Phi(phis) => (MarketModel::Mallows { phi: phis[i] }, self.n),
            Sweep::N(ns) => (self.model.clone(), ns[i]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "DA")]
    Da,
    #[serde(rename = "WDA")]
    Wda,
    #[serde(rename = "PDA")]
    Pda,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Da, Algorithm::Wda, Algorithm::Pda];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Da => "DA",
            Algorithm::Wda => "WDA",
            Algorithm::Pda => "PDA",
        }
    }
}

/// One algorithm run on one evaluation market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub sweep: f64,
    pub instance: usize,
    pub seed: u64,
    pub algo: Algorithm,
    pub proposals: u64,
    pub size: usize,
    pub stable: bool,
    pub perfect: bool,
    /// Truncated DA runs: 1 for DA and WDA, the round count for PDA.
    pub iters: usize,
}

/// Aggregate over the evaluation markets of one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep: f64,
    pub algo: Algorithm,
    pub proposals_mean: f64,
    pub proposals_std: f64,
    pub size_mean: f64,
    pub size_std: f64,
    pub stable_pct: f64,
    pub iters_mean: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub rows: Vec<ResultRow>,
    pub raw: Vec<RawRecord>,
    /// Learned windows per sweep value, in sweep order.
    pub windows: Vec<PredictionWindow>,
}

impl ExperimentResults {
    pub fn row(&self, sweep: f64, algo: Algorithm) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.sweep == sweep && r.algo == algo)
    }
}

/// splitmix64 finaliser, used to give every (sweep value, phase) its own seed stream.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Base seed of the training (`phase` 0) or evaluation (`phase` 1) draws at
/// sweep index `point`; instance `i` then uses `base ^ i`.
pub fn phase_seed(seed: u64, point: usize, phase: u64) -> u64 {
    mix(seed ^ mix(((point as u64) << 1) | phase))
}

fn oriented(inst: Instance, proposer: Side) -> Instance {
    match proposer {
        Side::Residents => inst,
        Side::Hospitals => inst.transposed(),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (k - 1.0)).sqrt())
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn aggregate(sweep: f64, algo: Algorithm, records: &[&RawRecord]) -> ResultRow {
    let proposals: Vec<f64> = records.iter().map(|r| r.proposals as f64).collect();
    let sizes: Vec<f64> = records.iter().map(|r| r.size as f64).collect();
    let (proposals_mean, proposals_std) = mean_std(&proposals);
    let (size_mean, size_std) = mean_std(&sizes);
    let stable = records.iter().filter(|r| r.stable).count() as f64;
    let iters: f64 = records.iter().map(|r| r.iters as f64).sum();
    let k = records.len() as f64;
    ResultRow {
        sweep,
        algo,
        proposals_mean: round4(proposals_mean),
        proposals_std: round4(proposals_std),
        size_mean: round4(size_mean),
        size_std: round4(size_std),
        stable_pct: round4(100.0 * stable / k),
        iters_mean: round4(iters / k),
    }
}

fn evaluate_instance(inst: &Instance, windows: &PredictionWindow, sweep: f64, index: usize, seed: u64) -> Result<[RawRecord; 3]> {
    let n = inst.n();
    let record = |algo, proposals, size, stable, perfect, iters| RawRecord {
        sweep,
        instance: index,
        seed,
        algo,
        proposals,
        size,
        stable,
        perfect,
        iters,
    };
    let (da, da_stats) = run_da(inst, Side::Residents);
    let wda = run_wda(inst, windows, Side::Residents);
    let pda = run_pda_adaptive(inst, &windows.upper_cutoffs(), pda_initial_extension(n), PDA_GROWTH)?;
    Ok([
        record(Algorithm::Da, da_stats.proposals, inst.total_len(Side::Hospitals), true, da.is_perfect(), 1),
        record(Algorithm::Wda, wda.stats.proposals, wda.instance_size, wda.verdict.is_stable(), wda.perfect, 1),
        record(
            Algorithm::Pda,
            pda.stats.proposals,
            pda.instance_size,
            pda.verdict.is_stable(),
            pda.matching.is_perfect(),
            pda.rounds,
        ),
    ])
}

/// Runs the whole pipeline in memory.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    let mut all_windows = Vec::new();
    for point in 0..cfg.sweep.len() {
        let (model, n) = cfg.point(point);
        let sweep = cfg.sweep.value(point);
        let sampler = |s: u64| model.sample(n, s).map(|inst| oriented(inst, cfg.proposer));
        let log = train(sampler, cfg.k_train, Side::Residents, phase_seed(cfg.seed, point, 0))?;
        let windows = learn_windows(&log)?;

        let eval_base = phase_seed(cfg.seed, point, 1);
        let per_instance: Vec<[RawRecord; 3]> = (0..cfg.k_eval)
            .into_par_iter()
            .map(|i| {
                let seed = eval_base ^ i as u64;
                evaluate_instance(&sampler(seed)?, &windows, sweep, i, seed)
            })
            .collect::<Result<_>>()?;
        let records: Vec<RawRecord> = per_instance.into_iter().flatten().collect();
        for algo in Algorithm::ALL {
            let of_algo: Vec<&RawRecord> = records.iter().filter(|r| r.algo == algo).collect();
            rows.push(aggregate(sweep, algo, &of_algo));
        }
        raw.extend(records);
        all_windows.push(windows);
    }
    Ok(ExperimentResults { rows, raw, windows: all_windows })
}

#[derive(Serialize)]
struct Metadata<'a> {
    seed: u64,
    config: &'a ExperimentConfig,
    sigma_multiplier: f64,
    sigma_convention: &'static str,
    rounding_convention: &'static str,
    /// `popularity_weight` and `jitter` of the rating market; absent for other models.
    tie_break: Option<TieBreak>,
    pda_initial_extension: &'static str,
    pda_growth: usize,
    seed_derivation: &'static str,
    std_convention: &'static str,
}

#[derive(Serialize)]
struct TieBreak {
    popularity_weight: f64,
    jitter: f64,
}

pub const RESULTS_FILE: &str = "results.csv";
pub const RAW_FILE: &str = "raw.csv";
pub const METADATA_FILE: &str = "metadata.json";
pub const PROPOSALS_PLOT: &str = "proposals.svg";
pub const SIZE_PLOT: &str = "instance_size.svg";

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn plot(results: &ExperimentResults, cfg: &ExperimentConfig, path: &Path, title: &str, pick: fn(&ResultRow) -> (f64, f64)) -> Result<()> {
    let series: Vec<Series> = Algorithm::ALL
        .iter()
        .map(|&algo| Series {
            label: algo.name().to_string(),
            points: results.rows.iter().filter(|r| r.algo == algo).map(|r| {
                let (mean, std) = pick(r);
                (r.sweep, mean, std)
            }).collect(),
        })
        .collect();
    let svg = render_band_plot(title, cfg.sweep.axis_name(), &series);
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Writes results, raw records, metadata and both plots into `cfg.out_dir`.
pub fn write_results(cfg: &ExperimentConfig, results: &ExperimentResults) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files: Vec<PathBuf> =
        [RESULTS_FILE, RAW_FILE, METADATA_FILE, PROPOSALS_PLOT, SIZE_PLOT].iter().map(|f| dir.join(f)).collect();

    write_csv(&files[0], &results.rows)?;
    write_csv(&files[1], &results.raw)?;
    let tie_break = match &cfg.model {
        MarketModel::Rating(t) => Some(TieBreak { popularity_weight: t.popularity_weight, jitter: t.jitter }),
        _ => None,
    };
    let meta = Metadata {
        seed: cfg.seed,
        config: cfg,
        sigma_multiplier: SIGMA_MULTIPLIER,
        sigma_convention: SIGMA_CONVENTION,
        rounding_convention: ROUNDING_CONVENTION,
        tie_break,
        pda_initial_extension: "max(1, floor(n / 8)), cutoffs start at the learned upper bounds",
        pda_growth: PDA_GROWTH,
        seed_derivation: "splitmix64(seed ^ splitmix64(2 * sweep_index + phase)) ^ instance_index; phase 0 trains, 1 evaluates",
        std_convention: "sample standard deviation over evaluation markets",
    };
    write_json_pretty(&files[2], &meta)?;
    plot(results, cfg, &files[3], "Proposals", |r| (r.proposals_mean, r.proposals_std))?;
    plot(results, cfg, &files[4], "Instance size", |r| (r.size_mean, r.size_std))?;
    Ok(files)
}

/// Evaluates and writes; returns the results and the files written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentResults, Vec<PathBuf>)> {
    let results = evaluate(cfg)?;
    let files = write_results(cfg, &results)?;
    Ok((results, files))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictions::sample_std;

    fn small(dir: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::mallows(16, vec![0.0, 0.5, 1.0], 11, dir);
        cfg.k_train = 4;
        cfg.k_eval = 3;
        cfg
    }

    #[test]
    fn config_validation() {
        let dir = Path::new("unused");
        let mut cfg = small(dir);
        cfg.k_train = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = small(dir);
        cfg.k_eval = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small(dir);
        cfg.sweep = Sweep::Phi(vec![]);
        assert!(cfg.validate().is_err());
        let mut cfg = small(dir);
        cfg.model = MarketModel::Uniform;
        assert!(cfg.validate().is_err());
        let mut cfg = small(dir);
        cfg.sweep = Sweep::N(vec![4, 0]);
        cfg.model = MarketModel::Uniform;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn one_row_per_sweep_value_and_algorithm() {
        let cfg = small(Path::new("unused"));
        let res = evaluate(&cfg).unwrap();
        assert_eq!(res.rows.len(), 9);
        assert_eq!(res.raw.len(), 27);
        for row in &res.rows {
            assert!(row.proposals_std >= 0.0 && row.size_std >= 0.0);
            assert!((0.0..=100.0).contains(&row.stable_pct));
        }
        for algo in [Algorithm::Da, Algorithm::Pda] {
            assert!(res.rows.iter().filter(|r| r.algo == algo).all(|r| r.stable_pct == 100.0));
        }
        let da = res.row(0.0, Algorithm::Da).unwrap();
        assert_eq!(da.size_mean, 256.0);
        let wda = res.row(0.0, Algorithm::Wda).unwrap();
        assert_eq!(wda.proposals_mean, 16.0);
        assert_eq!(wda.stable_pct, 100.0);
    }

    #[test]
    fn hospital_proposing_runs_on_transposed_markets() {
        let mut cfg = small(Path::new("unused"));
        cfg.proposer = Side::Hospitals;
        cfg.sweep = Sweep::Phi(vec![0.0]);
        let res = evaluate(&cfg).unwrap();
        assert_eq!(res.row(0.0, Algorithm::Wda).unwrap().proposals_mean, 16.0);
    }

    #[test]
    fn phase_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> =
            (0..50).flat_map(|p| [phase_seed(7, p, 0), phase_seed(7, p, 1)]).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn sample_std_matches_predictions_convention() {
        let (_, s) = mean_std(&[4.0, 5.0, 6.0]);
        assert_eq!(s, sample_std(&[4, 5, 6]));
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }
}
