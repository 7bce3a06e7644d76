//! Stable-matching instances that encode set disjointness.
//!
//! Both sides are laid out identically: `m` set agents `S`, `eta` upper padding
//! agents, `eta` lower padding agents and one backup agent, so `n = m + 2 eta + 1`.
//! Set pairs `(i, j)` are 1-based with `i != j` in `[1, m]`. The predicted
//! matching pairs every agent with the same-index agent on the other side; it is
//! stable exactly when `A` and `B` are disjoint, and otherwise every stable
//! matching moves some agent more than `eta` positions from its prediction.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::generators::rng_from_seed;
use crate::model::{Instance, Matching, Side};

/// A set-disjointness instance over ordered pairs of `[1, m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointnessInstance {
    pub m: usize,
    pub eta: usize,
    pub a: BTreeSet<(usize, usize)>,
    pub b: BTreeSet<(usize, usize)>,
}

impl DisjointnessInstance {
    pub fn new(m: usize, eta: usize, a: BTreeSet<(usize, usize)>, b: BTreeSet<(usize, usize)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDisjointness("m must be positive".into()));
        }
        for (name, set) in [("A", &a), ("B", &b)] {
            if let Some(&(i, j)) = set.iter().find(|&&(i, j)| i == j || !(1..=m).contains(&i) || !(1..=m).contains(&j)) {
                return Err(Error::InvalidDisjointness(format!(
                    "{name} contains ({i}, {j}); pairs need i != j within [1, {m}]"
                )));
            }
        }
        let common = a.intersection(&b).count();
        if common > 1 {
            return Err(Error::InvalidDisjointness(format!("|A ∩ B| = {common}, at most 1 allowed")));
        }
        Ok(DisjointnessInstance { m, eta, a, b })
    }

    pub fn n(&self) -> usize {
        self.m + 2 * self.eta + 1
    }

    /// The unique common pair, if any.
    pub fn intersection(&self) -> Option<(usize, usize)> {
        self.a.intersection(&self.b).next().copied()
    }

    pub fn is_disjoint(&self) -> bool {
        self.intersection().is_none()
    }
}

/// Agent role inside the gadget, identical on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Set,
    UpperPadding,
    LowerPadding,
    Backup,
}

#[derive(Debug, Clone)]
pub struct GadgetInstance {
    pub inst: Instance,
    pub groups: Vec<Group>,
    pub predicted: Matching,
    pub disjointness: DisjointnessInstance,
}

struct Layout {
    m: usize,
    eta: usize,
}

impl Layout {
    fn set(&self) -> std::ops::Range<usize> {
        0..self.m
    }
    fn upper(&self) -> std::ops::Range<usize> {
        self.m..self.m + self.eta
    }
    fn lower(&self) -> std::ops::Range<usize> {
        self.m + self.eta..self.m + 2 * self.eta
    }
    fn backup(&self) -> usize {
        self.m + 2 * self.eta
    }
}

/// Segments appear in order; agents inside a segment are in ascending index
/// order unless a shuffle RNG is supplied.
fn concat<R: Rng>(segments: Vec<Vec<usize>>, rng: &mut Option<R>) -> Vec<usize> {
    segments
        .into_iter()
        .flat_map(|mut seg| {
            if let Some(rng) = rng.as_mut() {
                seg.shuffle(rng);
            }
            seg
        })
        .collect()
}

fn set_agent_list<R: Rng>(
    layout: &Layout,
    i: usize,
    pairs: &BTreeSet<(usize, usize)>,
    rng: &mut Option<R>,
) -> Vec<usize> {
    // pairs are 1-based (own index, counterpart index)
    let preferred: Vec<usize> =
        layout.set().filter(|&j| j != i && pairs.contains(&(i + 1, j + 1))).collect();
    let rest: Vec<usize> = layout.set().filter(|&j| j != i && !pairs.contains(&(i + 1, j + 1))).collect();
    concat(
        vec![preferred, layout.upper().collect(), vec![i], vec![layout.backup()], layout.lower().collect(), rest],
        rng,
    )
}

fn padding_list<R: Rng>(n: usize, mate: usize, rng: &mut Option<R>) -> Vec<usize> {
    concat(vec![vec![mate], (0..n).filter(|&a| a != mate).collect()], rng)
}

fn backup_list<R: Rng>(layout: &Layout, rng: &mut Option<R>) -> Vec<usize> {
    concat(
        vec![layout.set().collect(), layout.upper().collect(), layout.lower().collect(), vec![layout.backup()]],
        rng,
    )
}

fn build<R: Rng>(d: &DisjointnessInstance, mut rng: Option<R>) -> GadgetInstance {
    let layout = Layout { m: d.m, eta: d.eta };
    let n = d.n();
    let mut groups = vec![Group::Set; n];
    let mut hospital_prefs = Vec::with_capacity(n);
    let mut resident_prefs = Vec::with_capacity(n);
    // residents read B with (hospital, resident) order, hence the transposed set
    let b_by_resident: BTreeSet<(usize, usize)> = d.b.iter().map(|&(i, j)| (j, i)).collect();
    for i in layout.set() {
        hospital_prefs.push(set_agent_list(&layout, i, &d.a, &mut rng));
        resident_prefs.push(set_agent_list(&layout, i, &b_by_resident, &mut rng));
    }
    for (range, group) in [(layout.upper(), Group::UpperPadding), (layout.lower(), Group::LowerPadding)] {
        for a in range {
            groups[a] = group;
            hospital_prefs.push(padding_list(n, a, &mut rng));
            resident_prefs.push(padding_list(n, a, &mut rng));
        }
    }
    groups[layout.backup()] = Group::Backup;
    hospital_prefs.push(backup_list(&layout, &mut rng));
    resident_prefs.push(backup_list(&layout, &mut rng));

    let inst = Instance::new(resident_prefs, hospital_prefs).expect("gadget lists are permutations");
    let predicted = Matching::from_pairs(n, (0..n).map(|a| (a, a))).expect("identity matching");
    GadgetInstance { inst, groups, predicted, disjointness: d.clone() }
}

/// Builds the gadget with every arbitrary segment in ascending index order.
pub fn build_gadget(d: &DisjointnessInstance) -> GadgetInstance {
    build::<rand_chacha::ChaCha8Rng>(d, None)
}

/// Builds the gadget with arbitrary segments shuffled by `seed`.
pub fn build_gadget_shuffled(d: &DisjointnessInstance, seed: u64) -> GadgetInstance {
    build(d, Some(rng_from_seed(seed)))
}

impl GadgetInstance {
    pub fn n(&self) -> usize {
        self.inst.n()
    }

    pub fn backup(&self) -> usize {
        self.n() - 1
    }

    /// The stable matching obtained from the prediction by changing six agents:
    /// the common pair `(i, j)` is matched, the `i`-th set resident moves to the
    /// backup hospital and the `j`-th set hospital to the backup resident.
    pub fn repair_matching(&self) -> Result<Matching> {
        let (i, j) = self
            .disjointness
            .intersection()
            .ok_or_else(|| Error::InvalidDisjointness("A and B are disjoint; the prediction is already stable".into()))?;
        let (i, j) = (i - 1, j - 1);
        let backup = self.backup();
        let n = self.n();
        let mut pairs: Vec<(usize, usize)> =
            (0..n).filter(|&a| a != i && a != j && a != backup).map(|a| (a, a)).collect();
        pairs.extend([(j, i), (i, backup), (backup, j)]);
        Matching::from_pairs(n, pairs)
    }

    fn errors(&self, mu: &Matching) -> Result<Vec<usize>> {
        if mu.n() != self.n() || !mu.is_perfect() {
            return Err(Error::InvalidMatching("error is defined for perfect matchings of the gadget".into()));
        }
        let mut out = Vec::with_capacity(2 * self.n());
        for side in [Side::Residents, Side::Hospitals] {
            let ranks = self.inst.ranks(side);
            for a in 0..self.n() {
                let predicted = ranks.rank(a, self.predicted.partner(side, a).expect("perfect")).expect("full lists");
                let actual = ranks.rank(a, mu.partner(side, a).expect("perfect")).expect("full lists");
                out.push(predicted.abs_diff(actual));
            }
        }
        Ok(out)
    }

    /// Largest rank displacement between the prediction and `mu` over all agents.
    pub fn max_error(&self, mu: &Matching) -> Result<usize> {
        Ok(self.errors(mu)?.into_iter().max().unwrap_or(0))
    }

    /// Sum of rank displacements over all agents.
    pub fn total_error(&self, mu: &Matching) -> Result<usize> {
        Ok(self.errors(mu)?.into_iter().sum())
    }

    /// Total error divided by the number of agents per side.
    pub fn average_error(&self, mu: &Matching) -> Result<f64> {
        Ok(self.total_error(mu)? as f64 / self.n() as f64)
    }
}

pub fn max_error(g: &GadgetInstance, mu: &Matching) -> Result<usize> {
    g.max_error(mu)
}

pub fn repair_matching(g: &GadgetInstance) -> Result<Matching> {
    g.repair_matching()
}

/// Random `A`, `B` over `[1, m]` pairs with each pair kept with probability
/// `density`; the result is made disjoint, or forced to share exactly one
/// random pair when `intersecting` is set.
pub fn random_disjointness(m: usize, eta: usize, density: f64, intersecting: bool, seed: u64) -> Result<DisjointnessInstance> {
    if m < 2 && intersecting {
        return Err(Error::InvalidDisjointness("an intersecting instance needs m >= 2".into()));
    }
    let mut rng = rng_from_seed(seed);
    let universe: Vec<(usize, usize)> =
        (1..=m).flat_map(|i| (1..=m).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut a = BTreeSet::new();
    let mut b = BTreeSet::new();
    for &pair in &universe {
        // each pair goes to A, B or neither, never both
        let u: f64 = rng.random();
        if u < density {
            a.insert(pair);
        } else if u < 2.0 * density {
            b.insert(pair);
        }
    }
    if intersecting {
        let common = universe[rng.random_range(0..universe.len())];
        a.insert(common);
        b.insert(common);
    }
    DisjointnessInstance::new(m, eta, a, b)
}
