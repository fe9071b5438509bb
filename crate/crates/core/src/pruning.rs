//! Classical pruning: force subsets that uniquely cover an element, exclude
//! conflicting subsets, shrink the problem, and repeat to fixpoint.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{Assignment, ExactCoverInstance};

/// A partially decided instance: the still-active subsets (with their original
/// indices), the still-uncovered elements, and the decided bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedProblem {
    /// (original subset index, element set), in original subset order.
    active: Vec<(usize, BTreeSet<i64>)>,
    uncovered: BTreeSet<i64>,
    decided: BTreeMap<usize, bool>,
    /// Original universe order; fixes the element scan order.
    universe: Vec<i64>,
    num_subsets: usize,
}

impl ReducedProblem {
    pub fn from_instance(instance: &ExactCoverInstance) -> Self {
        ReducedProblem {
            active: instance.subsets().iter().cloned().enumerate().collect(),
            uncovered: instance.universe().iter().copied().collect(),
            decided: BTreeMap::new(),
            universe: instance.universe().to_vec(),
            num_subsets: instance.num_subsets(),
        }
    }

    pub fn active(&self) -> &[(usize, BTreeSet<i64>)] {
        &self.active
    }

    pub fn uncovered(&self) -> &BTreeSet<i64> {
        &self.uncovered
    }

    pub fn decided(&self) -> &BTreeMap<usize, bool> {
        &self.decided
    }

    /// Terminal condition: no active subsets or no uncovered elements.
    pub fn is_solved(&self) -> bool {
        self.active.is_empty() || self.uncovered.is_empty()
    }

    /// Full-length assignment with undecided indices set to 0.
    pub fn to_assignment(&self) -> Assignment {
        let mut x = Assignment::zeros(self.num_subsets);
        for (&i, &bit) in &self.decided {
            x.set(i, bit);
        }
        x
    }

    fn position(&self, t: usize) -> Result<usize> {
        self.active
            .iter()
            .position(|&(i, _)| i == t)
            .ok_or_else(|| Error::InvalidArgument(format!("subset {t} is not active")))
    }
}

/// Result of running classical pruning to fixpoint.
#[derive(Debug, Clone)]
pub struct PruneOutcome {
    pub state: ReducedProblem,
    /// Whether any variable was decided.
    pub progressed: bool,
    /// Whether the state is terminal after pruning.
    pub solved: bool,
}

/// Finds the subset forced by the completeness condition: scanning uncovered
/// elements in universe order, the first one covered by exactly one active
/// subset forces that subset. Returns its original index, or `None` if every
/// uncovered element occurs in at least two active subsets.
pub fn find_forced_subset(state: &ReducedProblem) -> Option<usize> {
    for e in &state.universe {
        if !state.uncovered.contains(e) {
            continue;
        }
        let mut covering = state.active.iter().filter(|(_, s)| s.contains(e));
        if let (Some((t, _)), None) = (covering.next(), covering.next()) {
            return Some(*t);
        }
    }
    None
}

/// Selects subset `t` (bit 1): every active subset sharing an element with it
/// is excluded (bit 0), and its elements leave the uncovered set.
pub fn apply_selection(state: &ReducedProblem, t: usize) -> Result<ReducedProblem> {
    let pos = state.position(t)?;
    let chosen = state.active[pos].1.clone();
    let mut next = state.clone();
    next.decided.insert(t, true);
    let mut kept = Vec::with_capacity(next.active.len());
    for (i, s) in next.active.drain(..) {
        if i == t {
            continue;
        }
        if s.iter().any(|e| chosen.contains(e)) {
            next.decided.insert(i, false);
        } else {
            kept.push((i, s));
        }
    }
    next.active = kept;
    for e in &chosen {
        next.uncovered.remove(e);
    }
    Ok(next)
}

/// Excludes subset `t` (bit 0); the uncovered set is unchanged.
pub fn apply_exclusion(state: &ReducedProblem, t: usize) -> Result<ReducedProblem> {
    let pos = state.position(t)?;
    let mut next = state.clone();
    next.active.remove(pos);
    next.decided.insert(t, false);
    Ok(next)
}

/// Repeats forced selection until no forced subset exists or the state is
/// terminal. One selection per round, then a re-scan.
pub fn prune_to_fixpoint(state: &ReducedProblem) -> PruneOutcome {
    let mut current = state.clone();
    let mut progressed = false;
    while !current.is_solved() {
        match find_forced_subset(&current) {
            Some(t) => {
                current = apply_selection(&current, t).expect("forced subset is active");
                progressed = true;
            }
            None => break,
        }
    }
    let solved = current.is_solved();
    PruneOutcome {
        state: current,
        progressed,
        solved,
    }
}
