use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use predmatch::cli::{self, CutoffSource};
use predmatch::experiment::{ExperimentConfig, Sweep};
use predmatch::generators::{RatingTable, TierParams};
use predmatch::{io, MarketModel, Side};

const DEFAULT_PHIS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
const DEFAULT_SIZES: [usize; 5] = [100, 200, 300, 400, 500];

#[derive(Parser)]
#[command(name = "predmatch", version, about = "Stable matching with predicted rank windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Mallows,
    Tiered,
    Rating,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Proposer {
    Residents,
    Hospitals,
}

impl From<Proposer> for Side {
    fn from(p: Proposer) -> Side {
        match p {
            Proposer::Residents => Side::Residents,
            Proposer::Hospitals => Side::Hospitals,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "mallows")]
    model: ModelKind,
    /// Mallows dispersion; a comma-separated list sweeps it in `experiment`.
    #[arg(long, value_delimiter = ',')]
    phi: Vec<f64>,
    /// Tier fractions and weights (TOML with `fractions` and `weights`).
    #[arg(long)]
    tiers: Option<PathBuf>,
    /// Rating table (TOML with `table`, `popularity_weight`, `jitter`).
    #[arg(long)]
    ratings: Option<PathBuf>,
}

impl ModelArgs {
    fn build(&self, phi: Option<f64>) -> anyhow::Result<MarketModel> {
        Ok(match self.model {
            ModelKind::Uniform => MarketModel::Uniform,
            ModelKind::Mallows => MarketModel::Mallows { phi: phi.or(self.phi.first().copied()).unwrap_or(0.5) },
            ModelKind::Tiered => MarketModel::Tiered(match &self.tiers {
                Some(p) => io::read_tier_params(p)?,
                None => TierParams::default(),
            }),
            ModelKind::Rating => MarketModel::Rating(match &self.ratings {
                Some(p) => io::read_rating_table(p)?,
                None => RatingTable::default(),
            }),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a market and write OUT/instance.json.
    Gen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Classic deferred acceptance on an instance file.
    Da {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "residents")]
        proposer: Proposer,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deferred acceptance on hospital lists cut to rank windows.
    Wda {
        instance: PathBuf,
        /// Windows file: one `{"lo", "hi"}` record per hospital.
        #[arg(long)]
        windows: PathBuf,
        #[arg(long, value_enum, default_value = "residents")]
        proposer: Proposer,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resident-proposing deferred acceptance on hospital list prefixes.
    Pda {
        instance: PathBuf,
        /// JSON array of prefix lengths, one per hospital.
        #[arg(long, conflicts_with = "windows")]
        cutoffs: Option<PathBuf>,
        /// Windows file; the upper bounds become the prefix lengths.
        #[arg(long)]
        windows: Option<PathBuf>,
        /// Run a single round instead of extending unmatched hospitals.
        #[arg(long)]
        once: bool,
        /// First extension size; defaults to max(1, n / 8).
        #[arg(long)]
        extension: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn rank windows from sampled markets and write OUT/windows.json.
    Train {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        k_train: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "residents")]
        proposer: Proposer,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Train, evaluate DA, WDA and PDA, and write CSV, metadata and plots.
    Experiment {
        #[command(flatten)]
        model: ModelArgs,
        /// Market size; a comma-separated list sweeps it.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        k_train: usize,
        #[arg(long, default_value_t = 50)]
        k_eval: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "residents")]
        proposer: Proposer,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Build the set-disjointness gadget and report the prediction's error.
    Gadget {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eta: usize,
        /// Pair file for A: one `i j` pair per line.
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Shuffle the arbitrary list segments with this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a matching file for stability against an instance file.
    Verify { instance: PathBuf, matching: PathBuf },
}

fn experiment_config(
    model: &ModelArgs,
    n: &[usize],
    k_train: usize,
    k_eval: usize,
    seed: u64,
    proposer: Proposer,
    out: &Path,
) -> anyhow::Result<ExperimentConfig> {
    let is_mallows = matches!(model.model, ModelKind::Mallows);
    if model.phi.len() > 1 && n.len() > 1 {
        bail!("sweep either --phi or --n, not both");
    }
    let (sweep, size) = if is_mallows && n.len() <= 1 && model.phi.len() != 1 {
        let phis = if model.phi.is_empty() { DEFAULT_PHIS.to_vec() } else { model.phi.clone() };
        (Sweep::Phi(phis), n.first().copied().unwrap_or(500))
    } else {
        let sizes = if n.is_empty() { DEFAULT_SIZES.to_vec() } else { n.to_vec() };
        (Sweep::N(sizes.clone()), sizes[0])
    };
    Ok(ExperimentConfig {
        model: model.build(None)?,
        n: size,
        sweep,
        k_train,
        k_eval,
        proposer: proposer.into(),
        seed,
        out_dir: out.to_path_buf(),
    })
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let report = match cli.command {
        Command::Gen { model, n, seed, out } => cli::cmd_gen(&model.build(None)?, n, seed, &out)?,
        Command::Da { instance, proposer, out } => cli::cmd_da(&instance, proposer.into(), out.as_deref())?,
        Command::Wda { instance, windows, proposer, out } => {
            cli::cmd_wda(&instance, &windows, proposer.into(), out.as_deref())?
        }
        Command::Pda { instance, cutoffs, windows, once, extension, out } => {
            let source = match (&cutoffs, &windows) {
                (Some(c), _) => CutoffSource::Cutoffs(c),
                (None, Some(w)) => CutoffSource::Windows(w),
                (None, None) => bail!("pda needs --cutoffs or --windows"),
            };
            cli::cmd_pda(&instance, source, once, extension, out.as_deref())?
        }
        Command::Train { model, n, k_train, seed, proposer, out } => {
            cli::cmd_train(&model.build(None)?, n, k_train, seed, proposer.into(), &out)?
        }
        Command::Experiment { model, n, k_train, k_eval, seed, proposer, out } => {
            let cfg = experiment_config(&model, &n, k_train, k_eval, seed, proposer, &out)?;
            cli::cmd_experiment(&cfg).with_context(|| format!("experiment writing to {}", out.display()))?
        }
        Command::Gadget { m, eta, a, b, seed, out } => cli::cmd_gadget(m, eta, &a, &b, seed, out.as_deref())?,
        Command::Verify { instance, matching } => cli::cmd_verify(&instance, &matching)?,
    };
    Ok(report)
}

fn main() {
    match run(Cli::parse()) {
        Ok(report) => print!("{report}"),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
