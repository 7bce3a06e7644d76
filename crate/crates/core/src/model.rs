//! Preference profiles, matchings and stability checks.
//!
//! Agents are addressed by 0-based indices on each side. Ranks are 1-based:
//! the first entry of a preference list has rank 1. An [`Instance`] may hold
//! full lists (every list a permutation of `0..n`) or truncated ones, in which
//! case counterparts missing from a list have no rank.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of the market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Residents,
    Hospitals,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Residents => Side::Hospitals,
            Side::Hospitals => Side::Residents,
        }
    }

    fn label(self) -> char {
        match self {
            Side::Residents => 'r',
            Side::Hospitals => 'h',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Residents => "resident",
            Side::Hospitals => "hospital",
        })
    }
}

/// Human-facing 1-based agent label, e.g. `r3` or `h2`.
pub fn agent_label(side: Side, index: usize) -> String {
    format!("{}{}", side.label(), index + 1)
}

/// Dense `agent x counterpart -> rank` lookup for one side. Absent entries are 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    n: usize,
    ranks: Vec<u32>,
}

impl RankTable {
    fn build(n: usize, lists: &[Vec<usize>]) -> Self {
        let mut ranks = vec![0u32; n * n];
        for (agent, list) in lists.iter().enumerate() {
            for (pos, &c) in list.iter().enumerate() {
                ranks[agent * n + c] = pos as u32 + 1;
            }
        }
        RankTable { n, ranks }
    }

    /// 1-based rank of `counterpart` on `agent`'s list.
    #[inline]
    pub fn rank(&self, agent: usize, counterpart: usize) -> Option<usize> {
        match self.ranks[agent * self.n + counterpart] {
            0 => None,
            r => Some(r as usize),
        }
    }

    #[inline]
    pub fn contains(&self, agent: usize, counterpart: usize) -> bool {
        self.ranks[agent * self.n + counterpart] != 0
    }
}

/// A two-sided strict preference profile over `n` residents and `n` hospitals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    resident_prefs: Vec<Vec<usize>>,
    hospital_prefs: Vec<Vec<usize>>,
    resident_ranks: RankTable,
    hospital_ranks: RankTable,
}

impl Instance {
    /// Validates both sides and precomputes their rank tables.
    ///
    /// Lists may be shorter than `n` (truncated instances); mutual consistency
    /// of truncated lists is checked separately by [`Instance::check_consistent`].
    pub fn new(resident_prefs: Vec<Vec<usize>>, hospital_prefs: Vec<Vec<usize>>) -> Result<Self> {
        let n = resident_prefs.len();
        if n == 0 {
            return Err(Error::EmptyMarket);
        }
        if hospital_prefs.len() != n {
            return Err(Error::LengthMismatch {
                side: Side::Hospitals,
                expected: n,
                found: hospital_prefs.len(),
            });
        }
        validate_lists(Side::Residents, n, &resident_prefs)?;
        validate_lists(Side::Hospitals, n, &hospital_prefs)?;
        Ok(Self::from_validated(n, resident_prefs, hospital_prefs))
    }

    pub(crate) fn from_validated(
        n: usize,
        resident_prefs: Vec<Vec<usize>>,
        hospital_prefs: Vec<Vec<usize>>,
    ) -> Self {
        let resident_ranks = RankTable::build(n, &resident_prefs);
        let hospital_ranks = RankTable::build(n, &hospital_prefs);
        Instance { n, resident_prefs, hospital_prefs, resident_ranks, hospital_ranks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prefs(&self, side: Side) -> &[Vec<usize>] {
        match side {
            Side::Residents => &self.resident_prefs,
            Side::Hospitals => &self.hospital_prefs,
        }
    }

    pub fn ranks(&self, side: Side) -> &RankTable {
        match side {
            Side::Residents => &self.resident_ranks,
            Side::Hospitals => &self.hospital_ranks,
        }
    }

    pub fn resident_list(&self, r: usize) -> &[usize] {
        &self.resident_prefs[r]
    }

    pub fn hospital_list(&self, h: usize) -> &[usize] {
        &self.hospital_prefs[h]
    }

    /// Rank of hospital `h` on resident `r`'s list.
    pub fn resident_rank(&self, r: usize, h: usize) -> Option<usize> {
        self.resident_ranks.rank(r, h)
    }

    /// Rank of resident `r` on hospital `h`'s list.
    pub fn hospital_rank(&self, h: usize, r: usize) -> Option<usize> {
        self.hospital_ranks.rank(h, r)
    }

    /// True when every list on both sides is a permutation of `0..n`.
    pub fn is_full(&self) -> bool {
        self.resident_prefs.iter().chain(&self.hospital_prefs).all(|l| l.len() == self.n)
    }

    /// Total number of entries on one side's lists.
    pub fn total_len(&self, side: Side) -> usize {
        self.prefs(side).iter().map(Vec::len).sum()
    }

    /// `h` lists `r` exactly when `r` lists `h`.
    pub fn check_consistent(&self) -> Result<()> {
        for (r, list) in self.resident_prefs.iter().enumerate() {
            for &h in list {
                if !self.hospital_ranks.contains(h, r) {
                    return Err(Error::Inconsistent { resident: r, hospital: h });
                }
            }
        }
        for (h, list) in self.hospital_prefs.iter().enumerate() {
            for &r in list {
                if !self.resident_ranks.contains(r, h) {
                    return Err(Error::Inconsistent { resident: r, hospital: h });
                }
            }
        }
        Ok(())
    }

    /// The same market with the roles of the two sides exchanged.
    pub fn transposed(&self) -> Instance {
        Instance::from_validated(self.n, self.hospital_prefs.clone(), self.resident_prefs.clone())
    }
}

fn validate_lists(side: Side, n: usize, lists: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![usize::MAX; n];
    for (agent, list) in lists.iter().enumerate() {
        if list.len() > n {
            return Err(Error::ListTooLong { side, agent, len: list.len(), n });
        }
        for &index in list {
            if index >= n {
                return Err(Error::IndexOutOfRange { side, agent, index, n });
            }
            if seen[index] == agent {
                return Err(Error::DuplicateIndex { side, agent, index });
            }
            seen[index] = agent;
        }
    }
    Ok(())
}

/// On-disk form of an [`Instance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub n: usize,
    pub resident_prefs: Vec<Vec<usize>>,
    pub hospital_prefs: Vec<Vec<usize>>,
}

impl From<&Instance> for InstanceRecord {
    fn from(inst: &Instance) -> Self {
        InstanceRecord {
            n: inst.n,
            resident_prefs: inst.resident_prefs.clone(),
            hospital_prefs: inst.hospital_prefs.clone(),
        }
    }
}

impl TryFrom<InstanceRecord> for Instance {
    type Error = Error;

    fn try_from(rec: InstanceRecord) -> Result<Self> {
        if rec.resident_prefs.len() != rec.n {
            return Err(Error::LengthMismatch {
                side: Side::Residents,
                expected: rec.n,
                found: rec.resident_prefs.len(),
            });
        }
        Instance::new(rec.resident_prefs, rec.hospital_prefs)
    }
}

/// A partial or perfect one-to-one assignment between residents and hospitals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    resident_to_hospital: Vec<Option<usize>>,
    hospital_to_resident: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching { resident_to_hospital: vec![None; n], hospital_to_resident: vec![None; n] }
    }

    /// Builds a matching from `(resident, hospital)` pairs.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut mu = Matching::empty(n);
        for (r, h) in pairs {
            if r >= n || h >= n {
                return Err(Error::InvalidMatching(format!("pair ({r}, {h}) out of range for n = {n}")));
            }
            if mu.resident_to_hospital[r].is_some() {
                return Err(Error::InvalidMatching(format!("resident {r} matched twice")));
            }
            if mu.hospital_to_resident[h].is_some() {
                return Err(Error::InvalidMatching(format!("hospital {h} matched twice")));
            }
            mu.resident_to_hospital[r] = Some(h);
            mu.hospital_to_resident[h] = Some(r);
        }
        Ok(mu)
    }

    /// Builds a matching from a resident-indexed assignment.
    pub fn from_resident_assignment(assignment: &[Option<usize>]) -> Result<Self> {
        let pairs = assignment.iter().enumerate().filter_map(|(r, h)| h.map(|h| (r, h)));
        Matching::from_pairs(assignment.len(), pairs)
    }

    pub fn n(&self) -> usize {
        self.resident_to_hospital.len()
    }

    pub fn hospital_of(&self, r: usize) -> Option<usize> {
        self.resident_to_hospital[r]
    }

    pub fn resident_of(&self, h: usize) -> Option<usize> {
        self.hospital_to_resident[h]
    }

    pub fn partner(&self, side: Side, agent: usize) -> Option<usize> {
        match side {
            Side::Residents => self.resident_to_hospital[agent],
            Side::Hospitals => self.hospital_to_resident[agent],
        }
    }

    pub fn resident_assignment(&self) -> &[Option<usize>] {
        &self.resident_to_hospital
    }

    pub fn hospital_assignment(&self) -> &[Option<usize>] {
        &self.hospital_to_resident
    }

    /// Matched `(resident, hospital)` pairs in resident order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.resident_to_hospital.iter().enumerate().filter_map(|(r, h)| h.map(|h| (r, h)))
    }

    pub fn matched_count(&self) -> usize {
        self.resident_to_hospital.iter().filter(|h| h.is_some()).count()
    }

    pub fn is_perfect(&self) -> bool {
        self.matched_count() == self.n()
    }

    pub fn unmatched(&self, side: Side) -> Vec<usize> {
        let slots = match side {
            Side::Residents => &self.resident_to_hospital,
            Side::Hospitals => &self.hospital_to_resident,
        };
        slots.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(a, _)| a).collect()
    }

    /// Pairs `r` with `h`, releasing any previous partners of either.
    pub fn assign(&mut self, r: usize, h: usize) {
        if let Some(old_h) = self.resident_to_hospital[r].take() {
            self.hospital_to_resident[old_h] = None;
        }
        if let Some(old_r) = self.hospital_to_resident[h].take() {
            self.resident_to_hospital[old_r] = None;
        }
        self.resident_to_hospital[r] = Some(h);
        self.hospital_to_resident[h] = Some(r);
    }

    pub fn unassign_resident(&mut self, r: usize) {
        if let Some(h) = self.resident_to_hospital[r].take() {
            self.hospital_to_resident[h] = None;
        }
    }

    /// The same matching with residents and hospitals exchanged.
    pub fn transposed(&self) -> Matching {
        Matching {
            resident_to_hospital: self.hospital_to_resident.clone(),
            hospital_to_resident: self.resident_to_hospital.clone(),
        }
    }

    /// Resident-indexed array with `-1` for unmatched residents.
    pub fn to_array(&self) -> Vec<i64> {
        self.resident_to_hospital.iter().map(|h| h.map_or(-1, |h| h as i64)).collect()
    }

    pub fn from_array(entries: &[i64]) -> Result<Self> {
        let n = entries.len();
        let mut assignment = Vec::with_capacity(n);
        for (r, &e) in entries.iter().enumerate() {
            assignment.push(match e {
                -1 => None,
                h if h >= 0 && (h as usize) < n => Some(h as usize),
                h => {
                    return Err(Error::InvalidMatching(format!(
                        "record {r}: hospital {h} out of range for n = {n}"
                    )))
                }
            });
        }
        Matching::from_resident_assignment(&assignment)
    }

    /// Number of agents (on both sides) whose partner differs between the two matchings.
    pub fn changed_agents(&self, other: &Matching) -> usize {
        let residents = self
            .resident_to_hospital
            .iter()
            .zip(&other.resident_to_hospital)
            .filter(|(a, b)| a != b)
            .count();
        let hospitals = self
            .hospital_to_resident
            .iter()
            .zip(&other.hospital_to_resident)
            .filter(|(a, b)| a != b)
            .count();
        residents + hospitals
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (r, h)) in self.pairs().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({},{})", agent_label(Side::Residents, r), agent_label(Side::Hospitals, h))?;
        }
        f.write_str("}")
    }
}

/// Outcome of a stability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable { resident: usize, hospital: usize },
}

impl Verdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, Verdict::Stable)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Verdict::Stable => f.write_str("stable"),
            Verdict::Unstable { resident, hospital } => write!(
                f,
                "unstable; witness ({},{})",
                agent_label(Side::Residents, resident),
                agent_label(Side::Hospitals, hospital)
            ),
        }
    }
}

/// `agent` strictly prefers `candidate` to its current partner. A partner that
/// is absent or missing from the agent's list counts as worse than any listed
/// counterpart.
#[inline]
fn prefers(table: &RankTable, agent: usize, candidate: usize, current: Option<usize>) -> bool {
    let Some(cand) = table.rank(agent, candidate) else {
        return false;
    };
    match current.and_then(|c| table.rank(agent, c)) {
        Some(cur) => cand < cur,
        None => true,
    }
}

/// `(r, h)` blocks `mu` in `inst`: each lists the other and strictly prefers the
/// other to its partner in `mu` (an unmatched agent prefers anyone it lists).
pub fn is_blocking_pair(inst: &Instance, mu: &Matching, r: usize, h: usize) -> bool {
    assert!(r < inst.n() && h < inst.n(), "agent index out of range");
    assert_eq!(mu.n(), inst.n(), "matching and instance sizes differ");
    prefers(&inst.resident_ranks, r, h, mu.hospital_of(r))
        && prefers(&inst.hospital_ranks, h, r, mu.resident_of(h))
}

/// Exhaustive O(n^2) scan for a blocking pair. The witness is the first blocking
/// pair in resident order, then in that resident's preference order.
pub fn verify_stability(inst: &Instance, mu: &Matching) -> Verdict {
    assert_eq!(mu.n(), inst.n(), "matching and instance sizes differ");
    for r in 0..inst.n() {
        let current = mu.hospital_of(r);
        for &h in inst.resident_list(r) {
            if Some(h) == current {
                break;
            }
            if prefers(&inst.hospital_ranks, h, r, mu.resident_of(h)) {
                return Verdict::Unstable { resident: r, hospital: h };
            }
        }
    }
    Verdict::Stable
}

/// Every blocking pair of `mu`, in the scan order of [`verify_stability`].
pub fn blocking_pairs(inst: &Instance, mu: &Matching) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..inst.n() {
        for h in 0..inst.n() {
            if is_blocking_pair(inst, mu, r, h) {
                out.push((r, h));
            }
        }
    }
    out.sort_by_key(|&(r, h)| (r, inst.resident_rank(r, h)));
    out
}

/// `mu` exists in `inst`: every matched agent lists its partner.
pub fn exists_in(inst: &Instance, mu: &Matching) -> bool {
    mu.pairs().all(|(r, h)| inst.resident_ranks.contains(r, h) && inst.hospital_ranks.contains(h, r))
}
