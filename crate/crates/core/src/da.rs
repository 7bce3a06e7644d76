//! Deferred acceptance with proposal counting.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::{Instance, Matching, Side};

/// Counters for one deferred-acceptance execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Offers made; a proposer never offers twice to the same receiver.
    pub proposals: u64,
    pub matched_count: usize,
    pub proposer_side: Side,
    /// Proposal rounds: the initial free proposers form round 1, proposers
    /// freed during round k propose in round k + 1.
    pub iterations: usize,
}

/// Order in which free proposers are served. Every discipline yields the same
/// matching; only the round counter differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueueDiscipline {
    #[default]
    Fifo,
    Lifo,
}

/// Runs deferred acceptance on `inst` with `proposer_side` proposing, serving
/// free proposers first-in first-out.
///
/// The result is stable in `inst` and proposer-optimal among its stable
/// matchings. Truncated instances must be mutually consistent; a proposer that
/// exhausts its list stays unmatched.
pub fn run_da(inst: &Instance, proposer_side: Side) -> (Matching, RunStats) {
    run_da_with(inst, proposer_side, QueueDiscipline::Fifo)
}

pub fn run_da_with(inst: &Instance, proposer_side: Side, discipline: QueueDiscipline) -> (Matching, RunStats) {
    let n = inst.n();
    let proposer_lists = inst.prefs(proposer_side);
    let receiver_ranks = inst.ranks(proposer_side.other());

    // held[receiver] = proposer currently held
    let mut held: Vec<Option<usize>> = vec![None; n];
    let mut cursor = vec![0usize; n];
    let mut proposals = 0u64;
    let mut rounds = 0usize;

    let mut current: VecDeque<usize> = (0..n).collect();
    let mut next = VecDeque::new();
    while !current.is_empty() {
        rounds += 1;
        while let Some(proposer) = pop(&mut current, discipline) {
            let list = &proposer_lists[proposer];
            if cursor[proposer] >= list.len() {
                continue;
            }
            let receiver = list[cursor[proposer]];
            cursor[proposer] += 1;
            proposals += 1;
            let Some(new_rank) = receiver_ranks.rank(receiver, proposer) else {
                next.push_back(proposer);
                continue;
            };
            match held[receiver] {
                None => held[receiver] = Some(proposer),
                Some(incumbent) => {
                    let inc_rank = receiver_ranks
                        .rank(receiver, incumbent)
                        .expect("held proposer is on the receiver's list");
                    if new_rank < inc_rank {
                        held[receiver] = Some(proposer);
                        next.push_back(incumbent);
                    } else {
                        next.push_back(proposer);
                    }
                }
            }
        }
        std::mem::swap(&mut current, &mut next);
    }

    let pairs = held.iter().enumerate().filter_map(|(receiver, p)| {
        p.map(|proposer| match proposer_side {
            Side::Residents => (proposer, receiver),
            Side::Hospitals => (receiver, proposer),
        })
    });
    let mu = Matching::from_pairs(n, pairs).expect("held offers form a matching");
    let stats = RunStats { proposals, matched_count: mu.matched_count(), proposer_side, iterations: rounds };
    (mu, stats)
}

fn pop(queue: &mut VecDeque<usize>, discipline: QueueDiscipline) -> Option<usize> {
    match discipline {
        QueueDiscipline::Fifo => queue.pop_front(),
        QueueDiscipline::Lifo => queue.pop_back(),
    }
}
