//! Deferred acceptance on preference lists truncated by learned predictions.
//!
//! Hospitals receive a predicted rank for their eventual partner and keep only
//! part of their preference list: a window around the prediction (WDA) or a
//! prefix up to it (PDA). Residents propose on the truncated instance, which
//! cuts both list length and proposal count when predictions are good. The
//! crate also learns windows from past markets, generates synthetic markets,
//! builds the set-disjointness gadget showing why a surviving stable matching
//! is needed, and checks everything against a brute-force oracle.
//!
//! ```
//! use predmatch::{figure1_instance, run_wda, Side};
//!
//! let (inst, stable, windows) = figure1_instance();
//! let out = run_wda(&inst, &windows, Side::Residents);
//! assert_eq!(out.matching, stable);
//! assert!(out.verdict.is_stable());
//!
//! let hospitals_first = run_wda(&inst, &windows, Side::Hospitals);
//! assert_eq!(hospitals_first.verdict.to_string(), "unstable; witness (r3,h2)");
//! ```

pub mod cli;
pub mod da;
pub mod error;
pub mod experiment;
pub mod gadget;
pub mod io;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod plot;
pub mod predictions;
pub mod truncation;

pub use da::{run_da, RunStats};
pub use error::{Error, Result};
pub use generators::{figure1_instance, MarketModel};
pub use model::{is_blocking_pair, verify_stability, Instance, Matching, Side, Verdict};
pub use truncation::{
    prune_prefix, prune_window, run_pda_adaptive, run_pda_once, run_wda, PredictionWindow, PrunedInstance,
    RankWindow,
};
