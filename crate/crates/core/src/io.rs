//! File formats.
//!
//! * instance: JSON object `{"n", "resident_prefs", "hospital_prefs"}`, 0-based indices
//! * matching: JSON array of length `n`, resident -> hospital, `-1` for unmatched
//! * windows: JSON array with one `{"lo", "hi"}` record (1-based ranks) per receiving agent
//! * cutoffs: JSON array of `n` prefix lengths
//! * set pairs: text, one `i j` pair per line (1-based), `#` comments allowed
//! * tier and rating-table configs: TOML

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{RatingTable, TierParams};
use crate::model::{Instance, InstanceRecord, Matching};
use crate::truncation::{PredictionWindow, RankWindow};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, message: message.into() }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json_pretty<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_instance(text: &str, path: &Path) -> Result<Instance> {
    let rec: InstanceRecord = serde_json::from_str(text).map_err(|e| parse_error(path, e.line(), e.to_string()))?;
    Instance::try_from(rec)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?, path)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    write_json(path, &InstanceRecord::from(inst))
}

/// Index of the record being read at byte `offset`: records are comma-terminated.
fn record_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches(',').count()
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    start + column
}

/// Parses a matching; when `n` is given the record count must equal it.
pub fn parse_matching(text: &str, path: &Path, n: Option<usize>) -> Result<Matching> {
    let entries: Vec<i64> = serde_json::from_str(text).map_err(|e| {
        let k = record_at(text, byte_offset(text, e.line(), e.column()));
        parse_error(path, e.line(), format!("{e} (at record #{k})"))
    })?;
    let last_line = text.trim_end().lines().count().max(1);
    if let Some(n) = n {
        if entries.len() != n {
            let message = if entries.len() < n {
                format!("record #{} missing: expected {n} records, found {}", entries.len(), entries.len())
            } else {
                format!("record #{n} is extra: expected {n} records, found {}", entries.len())
            };
            return Err(parse_error(path, last_line, message));
        }
    }
    Matching::from_array(&entries).map_err(|e| parse_error(path, last_line, e.to_string()))
}

pub fn read_matching(path: &Path, n: Option<usize>) -> Result<Matching> {
    parse_matching(&read(path)?, path, n)
}

pub fn write_matching(path: &Path, mu: &Matching) -> Result<()> {
    write_json(path, &mu.to_array())
}

pub fn read_windows(path: &Path, n: usize) -> Result<PredictionWindow> {
    let text = read(path)?;
    let windows: Vec<RankWindow> =
        serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.to_string()))?;
    PredictionWindow::from_bounds(n, windows)
}

pub fn write_windows(path: &Path, windows: &PredictionWindow) -> Result<()> {
    write_json_pretty(path, windows)
}

/// Prefix cutoffs: a JSON array of `n` ranks in `[1, n]`.
pub fn read_cutoffs(path: &Path, n: usize) -> Result<Vec<usize>> {
    let text = read(path)?;
    let rho: Vec<usize> = serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.to_string()))?;
    if rho.len() != n {
        return Err(parse_error(path, 1, format!("expected {n} cutoffs, found {}", rho.len())));
    }
    if let Some((h, c)) = rho.iter().enumerate().find(|(_, &c)| !(1..=n).contains(&c)) {
        return Err(parse_error(path, 1, format!("cutoff #{h} is {c}, outside [1, {n}]")));
    }
    Ok(rho)
}

/// One `i j` pair per line; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str, path: &Path) -> Result<BTreeSet<(usize, usize)>> {
    let mut out = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[i, j]) => {
                out.insert((i, j));
            }
            _ => return Err(parse_error(path, idx + 1, format!("expected two positive integers `i j`, got `{line}`"))),
        }
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<BTreeSet<(usize, usize)>> {
    parse_pairs(&read(path)?, path)
}

pub fn read_tier_params(path: &Path) -> Result<TierParams> {
    let p: TierParams = toml::from_str(&read(path)?).map_err(|e| parse_error(path, 0, e.to_string()))?;
    p.validate()?;
    Ok(p)
}

pub fn read_rating_table(path: &Path) -> Result<RatingTable> {
    RatingTable::from_toml_str(&read(path)?)
}
