//! Command implementations behind the `predmatch` binary. Each command reads
//! and writes files and returns the text report it would print.

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use crate::da::run_da;
use crate::error::{Error, Result};
use crate::experiment::{pda_initial_extension, run_experiment, ExperimentConfig, PDA_GROWTH};
use crate::gadget::{build_gadget, build_gadget_shuffled, DisjointnessInstance};
use crate::generators::MarketModel;
use crate::io;
use crate::model::{verify_stability, Instance, Matching, Side};
use crate::oracle::{enumerate_stable, MAX_ORACLE_N};
use crate::predictions::{learn_windows, train};
use crate::truncation::{run_pda_adaptive, run_pda_once, run_wda};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn save_matching(out: Option<&Path>, mu: &Matching, report: &mut String) -> Result<()> {
    if let Some(dir) = out {
        create_dir(dir)?;
        let path = dir.join("matching.json");
        io::write_matching(&path, mu)?;
        let _ = writeln!(report, "wrote {}", path.display());
    }
    Ok(())
}

/// Samples one market and writes it to `out/instance.json`.
pub fn cmd_gen(model: &MarketModel, n: usize, seed: u64, out: &Path) -> Result<String> {
    let inst = model.sample(n, seed)?;
    create_dir(out)?;
    let path = out.join("instance.json");
    io::write_instance(&path, &inst)?;
    Ok(format!("{} market, n = {n}, seed {seed}\nwrote {}\n", model.name(), path.display()))
}

pub fn cmd_da(instance: &Path, proposer: Side, out: Option<&Path>) -> Result<String> {
    let inst = io::read_instance(instance)?;
    let (mu, stats) = run_da(&inst, proposer);
    let mut report = format!(
        "{proposer}-proposing DA: {mu}\nproposals {}, rounds {}, matched {}/{}\n",
        stats.proposals,
        stats.iterations,
        stats.matched_count,
        inst.n()
    );
    save_matching(out, &mu, &mut report)?;
    Ok(report)
}

pub fn cmd_wda(instance: &Path, windows: &Path, proposer: Side, out: Option<&Path>) -> Result<String> {
    let inst = io::read_instance(instance)?;
    let pred = io::read_windows(windows, inst.n())?;
    let res = run_wda(&inst, &pred, proposer);
    let mut report = format!(
        "{proposer}-proposing WDA: {}\n{}; {}\nproposals {}, instance size {}\n",
        res.matching,
        res.verdict,
        if res.perfect { "perfect" } else { "not perfect" },
        res.stats.proposals,
        res.instance_size
    );
    save_matching(out, &res.matching, &mut report)?;
    Ok(report)
}

/// Prefix cutoffs for PDA come from a cutoff array or, failing that, the upper
/// bounds of a windows file.
pub enum CutoffSource<'a> {
    Cutoffs(&'a Path),
    Windows(&'a Path),
}

pub fn cmd_pda(
    instance: &Path,
    source: CutoffSource<'_>,
    once: bool,
    extension: Option<usize>,
    out: Option<&Path>,
) -> Result<String> {
    let inst = io::read_instance(instance)?;
    let rho = match source {
        CutoffSource::Cutoffs(p) => io::read_cutoffs(p, inst.n())?,
        CutoffSource::Windows(p) => io::read_windows(p, inst.n())?.upper_cutoffs(),
    };
    let mut report = String::new();
    let mu = if once {
        let round = run_pda_once(&inst, &rho)?;
        let _ = writeln!(report, "PDA (single round): {}", round.matching);
        let _ = writeln!(report, "{}", verify_stability(&inst, &round.matching));
        if round.unmatched_hospitals.is_empty() {
            let _ = writeln!(report, "perfect");
        } else {
            let labels: Vec<String> =
                round.unmatched_hospitals.iter().map(|&h| crate::model::agent_label(Side::Hospitals, h)).collect();
            let _ = writeln!(report, "under-predicted hospitals: {}", labels.join(", "));
        }
        let _ = writeln!(report, "proposals {}, instance size {}", round.stats.proposals, round.instance_size);
        round.matching
    } else {
        let ext = extension.unwrap_or_else(|| pda_initial_extension(inst.n()));
        let res = run_pda_adaptive(&inst, &rho, ext, PDA_GROWTH)?;
        let _ = writeln!(report, "PDA: {}", res.matching);
        let _ = writeln!(report, "{}", res.verdict);
        let _ = writeln!(
            report,
            "proposals {}, rounds {}, instance size {}",
            res.stats.proposals, res.rounds, res.instance_size
        );
        res.matching
    };
    save_matching(out, &mu, &mut report)?;
    Ok(report)
}

/// Learns rank windows for the receiving side from `k_train` sampled markets.
pub fn cmd_train(model: &MarketModel, n: usize, k_train: usize, seed: u64, proposer: Side, out: &Path) -> Result<String> {
    let log = train(|s| model.sample(n, s), k_train, proposer, seed)?;
    let windows = learn_windows(&log)?;
    create_dir(out)?;
    let path = out.join("windows.json");
    io::write_windows(&path, &windows)?;
    let receiver = log.receiver_side();
    Ok(format!(
        "{} market, n = {n}, {k_train} training runs, {proposer}s proposing\nwindows for {receiver}s, mean width {:.2}\nwrote {}\n",
        model.name(),
        windows.total_width() as f64 / n as f64,
        path.display()
    ))
}

pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<String> {
    let (results, files) = run_experiment(cfg)?;
    let mut report = String::from("sweep algo proposals_mean size_mean stable_pct iters_mean\n");
    for r in &results.rows {
        let _ = writeln!(
            report,
            "{} {} {:.1} {:.1} {:.1} {:.2}",
            r.sweep,
            r.algo.name(),
            r.proposals_mean,
            r.size_mean,
            r.stable_pct,
            r.iters_mean
        );
    }
    for f in files {
        let _ = writeln!(report, "wrote {}", f.display());
    }
    Ok(report)
}

/// Stable-set summary for small markets; `None` above the oracle limit.
fn oracle_summary(inst: &Instance) -> Result<Option<(usize, Matching, Matching)>> {
    if inst.n() > MAX_ORACLE_N {
        return Ok(None);
    }
    let s = enumerate_stable(inst)?;
    Ok(Some((s.len(), s.resident_optimal().clone(), s.hospital_optimal().clone())))
}

/// Checks a matching file against an instance file.
pub fn cmd_verify(instance: &Path, matching: &Path) -> Result<String> {
    let inst = io::read_instance(instance)?;
    let mu = io::read_matching(matching, Some(inst.n()))?;
    let verdict = verify_stability(&inst, &mu);
    let summary = oracle_summary(&inst)?;
    let mut report = verdict.to_string();
    match (&summary, verdict.is_stable()) {
        (Some((1, _, _)), true) => report.push_str("; unique stable matching\n"),
        (Some((k, _, _)), true) => {
            let _ = writeln!(report, "; one of {k} stable matchings");
        }
        _ => report.push('\n'),
    }
    if let Some((k, ro, ho)) = summary {
        if k == 1 {
            let _ = writeln!(report, "oracle: unique stable matching {ro}");
        } else {
            let _ = writeln!(report, "oracle: {k} stable matchings; resident-optimal {ro}; hospital-optimal {ho}");
        }
    }
    Ok(report)
}

/// Files written by [`cmd_gadget`] when an output directory is given.
pub fn gadget_files(out: &Path) -> [PathBuf; 3] {
    [out.join("instance.json"), out.join("predicted.json"), out.join("report.txt")]
}

/// Builds the disjointness gadget from two pair files and reports how far
/// the identity prediction is from stability.
pub fn cmd_gadget(m: usize, eta: usize, a: &Path, b: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<String> {
    let d = DisjointnessInstance::new(m, eta, io::read_pairs(a)?, io::read_pairs(b)?)?;
    let g = match seed {
        Some(s) => build_gadget_shuffled(&d, s),
        None => build_gadget(&d),
    };
    let n = g.n();
    let mut report = match d.intersection() {
        None => format!("m = {m}, eta = {eta}, n = {n}; A and B are disjoint\n"),
        Some((i, j)) => format!("m = {m}, eta = {eta}, n = {n}; A and B share ({i},{j})\n"),
    };
    let verdict = verify_stability(&g.inst, &g.predicted);
    let nearest = if n <= MAX_ORACLE_N {
        let s = enumerate_stable(&g.inst)?;
        let mut best = usize::MAX;
        for mu in s.matchings() {
            best = best.min(g.max_error(mu)?);
        }
        Some(best)
    } else {
        None
    };
    if verdict.is_stable() {
        let _ = writeln!(report, "μ̂ stable; max error {}", nearest.unwrap_or(0));
    } else {
        let repaired = g.repair_matching()?;
        let changed = repaired.changed_agents(&g.predicted);
        let avg = g.average_error(&repaired)?;
        let _ = write!(report, "μ̂ unstable; repaired matching changes {changed} agents; average error {avg:.3} <= 4");
        match nearest {
            Some(e) => {
                let _ = writeln!(report, "; nearest stable matching has max error {e} > eta = {eta}");
            }
            None => {
                let _ = writeln!(report, "; repaired max error {}", g.max_error(&repaired)?);
            }
        }
        let _ = writeln!(report, "{verdict}");
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        let [inst_path, pred_path, report_path] = gadget_files(dir);
        io::write_instance(&inst_path, &g.inst)?;
        io::write_matching(&pred_path, &g.predicted)?;
        if !verdict.is_stable() {
            io::write_matching(&dir.join("repaired.json"), &g.repair_matching()?)?;
        }
        write_text(&report_path, &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figure1_instance;

    fn figure1_files(dir: &Path) -> PathBuf {
        let (inst, mu, _) = figure1_instance();
        let inst_path = dir.join("instance.json");
        io::write_instance(&inst_path, &inst).unwrap();
        io::write_matching(&dir.join("mu.json"), &mu).unwrap();
        let lemma = Matching::from_pairs(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        io::write_matching(&dir.join("lemma.json"), &lemma).unwrap();
        inst_path
    }

    #[test]
    fn verify_reports() {
        let dir = tempfile::tempdir().unwrap();
        let inst = figure1_files(dir.path());
        let ok = cmd_verify(&inst, &dir.path().join("mu.json")).unwrap();
        assert!(ok.starts_with("stable; unique stable matching\n"), "{ok}");
        let bad = cmd_verify(&inst, &dir.path().join("lemma.json")).unwrap();
        assert!(bad.starts_with("unstable; witness (r3,h2)\n"), "{bad}");
        assert!(bad.contains("oracle: unique stable matching"));
    }

    #[test]
    fn gadget_reports() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        fs::write(&a, "1 2\n").unwrap();
        fs::write(&b, "2 3\n").unwrap();
        let r = cmd_gadget(3, 1, &a, &b, None, None).unwrap();
        assert!(r.contains("μ̂ stable; max error 0"), "{r}");
        fs::write(&b, "1 2\n").unwrap();
        let r = cmd_gadget(3, 1, &a, &b, None, Some(dir.path())).unwrap();
        assert!(r.contains("μ̂ unstable; repaired matching changes 6 agents; average error"), "{r}");
        assert!(dir.path().join("repaired.json").exists());
        fs::write(&a, "").unwrap();
        fs::write(&b, "").unwrap();
        assert!(cmd_gadget(3, 1, &a, &b, Some(4), None).unwrap().contains("μ̂ stable"));
    }
}
