//! Problem model for the exact cover problem: instances, assignments,
//! the classical objective, a seeded instance generator and an exact
//! backtracking oracle.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact cover instance: a universe of distinct elements and an ordered
/// collection of non-empty, pairwise-distinct subsets of the universe.
///
/// Immutable after construction; element and subset orderings are fixed and
/// define all index semantics downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct ExactCoverInstance {
    universe: Vec<i64>,
    subsets: Vec<BTreeSet<i64>>,
}

/// Interchange form: `{"universe": [...], "subsets": [[...], ...]}`,
/// order-significant.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceJson {
    universe: Vec<i64>,
    subsets: Vec<Vec<i64>>,
}

impl TryFrom<InstanceJson> for ExactCoverInstance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        let subsets = raw
            .subsets
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();
        ExactCoverInstance::new(raw.universe, subsets)
    }
}

impl From<ExactCoverInstance> for InstanceJson {
    fn from(inst: ExactCoverInstance) -> Self {
        InstanceJson {
            universe: inst.universe,
            subsets: inst
                .subsets
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
        }
    }
}

impl ExactCoverInstance {
    /// Validates and constructs an instance.
    pub fn new(universe: Vec<i64>, subsets: Vec<BTreeSet<i64>>) -> Result<Self> {
        let elements: BTreeSet<i64> = universe.iter().copied().collect();
        if elements.len() != universe.len() {
            return Err(Error::InvalidArgument(
                "universe contains duplicate elements".into(),
            ));
        }
        let mut seen: BTreeSet<&BTreeSet<i64>> = BTreeSet::new();
        for (i, s) in subsets.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidArgument(format!("subset {i} is empty")));
            }
            if !s.is_subset(&elements) {
                return Err(Error::InvalidArgument(format!(
                    "subset {i} contains elements outside the universe"
                )));
            }
            if !seen.insert(s) {
                return Err(Error::InvalidArgument(format!("subset {i} is a duplicate")));
            }
        }
        Ok(Self { universe, subsets })
    }

    /// Number of elements n.
    pub fn num_elements(&self) -> usize {
        self.universe.len()
    }

    /// Number of subsets m.
    pub fn num_subsets(&self) -> usize {
        self.subsets.len()
    }

    pub fn universe(&self) -> &[i64] {
        &self.universe
    }

    pub fn subsets(&self) -> &[BTreeSet<i64>] {
        &self.subsets
    }

    pub fn subset(&self, i: usize) -> &BTreeSet<i64> {
        &self.subsets[i]
    }

    /// Per-element coverage counts under `x`: entry j is the number of
    /// selected subsets containing element j.
    pub fn coverage_counts(&self, x: &Assignment) -> Result<Vec<u32>> {
        if x.len() != self.subsets.len() {
            return Err(Error::InvalidArgument(format!(
                "assignment length {} does not match subset count {}",
                x.len(),
                self.subsets.len()
            )));
        }
        let mut counts = vec![0u32; self.universe.len()];
        for (i, subset) in self.subsets.iter().enumerate() {
            if x.bit(i) {
                for (j, e) in self.universe.iter().enumerate() {
                    if subset.contains(e) {
                        counts[j] += 1;
                    }
                }
            }
        }
        Ok(counts)
    }

    /// Classical objective: sum over elements of (coverage - 1)^2.
    /// Zero iff `x` is an exact cover.
    pub fn objective_value(&self, x: &Assignment) -> Result<u64> {
        let counts = self.coverage_counts(x)?;
        Ok(counts
            .iter()
            .map(|&c| {
                let d = i64::from(c) - 1;
                (d * d) as u64
            })
            .sum())
    }
}

/// A binary decision vector over the subsets of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn zeros(m: usize) -> Self {
        Assignment(vec![false; m])
    }

    /// Decodes basis index `b` into bits, with bit i of `b` holding x_i.
    pub fn from_basis_index(m: usize, b: usize) -> Self {
        Assignment((0..m).map(|i| (b >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    /// Bits rendered as a string, x_0 first.
    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl From<Vec<u8>> for Assignment {
    fn from(bits: Vec<u8>) -> Self {
        Assignment(bits.into_iter().map(|b| b != 0).collect())
    }
}

/// Completeness check: true iff every element of `uncovered` belongs to at
/// least one of `active_subsets`. True does not imply an exact cover exists.
pub fn is_completable<'a, I>(active_subsets: I, uncovered: &BTreeSet<i64>) -> bool
where
    I: IntoIterator<Item = &'a BTreeSet<i64>>,
{
    let mut coverable: BTreeSet<i64> = BTreeSet::new();
    for s in active_subsets {
        coverable.extend(s.iter().copied());
    }
    uncovered.iter().all(|e| coverable.contains(e))
}

const GENERATE_MAX_RETRIES: usize = 1000;

/// Generates a random instance with n = m elements and m subsets such that a
/// planted exact cover exists and every element occurs in at least two
/// subsets. Deterministic given the seed.
///
/// Construction: partition the elements into k planted blocks with
/// k ~ U[2, m/2], add m - k random distractor subsets of size at most
/// ceil(n/3), then insert under-covered elements into distractors until every
/// element occurs twice. Duplicate subsets cause a bounded retry.
pub fn generate_instance(m: usize, rng_seed: u64) -> Result<ExactCoverInstance> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at least 4")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let universe: Vec<i64> = (1..=m as i64).collect();
    let max_distractor = m.div_ceil(3);

    for _ in 0..GENERATE_MAX_RETRIES {
        let k = rng.random_range(2..=m / 2);

        // Planted partition: one seed element per block, rest assigned at random.
        let mut shuffled = universe.clone();
        shuffled.shuffle(&mut rng);
        let mut blocks: Vec<BTreeSet<i64>> = (0..k).map(|b| BTreeSet::from([shuffled[b]])).collect();
        for &e in &shuffled[k..] {
            let b = rng.random_range(0..k);
            blocks[b].insert(e);
        }

        let mut distractors: Vec<BTreeSet<i64>> = Vec::with_capacity(m - k);
        for _ in 0..m - k {
            let size = rng.random_range(1..=max_distractor);
            let mut pool = universe.clone();
            pool.shuffle(&mut rng);
            distractors.push(pool[..size].iter().copied().collect());
        }

        // Repair: every element must occur in >= 2 subsets. Planted blocks are
        // never touched, so the planted solution survives.
        for &e in &universe {
            loop {
                let count = blocks
                    .iter()
                    .chain(distractors.iter())
                    .filter(|s| s.contains(&e))
                    .count();
                if count >= 2 {
                    break;
                }
                let candidates: Vec<usize> = (0..distractors.len())
                    .filter(|&d| !distractors[d].contains(&e))
                    .collect();
                let d = candidates[rng.random_range(0..candidates.len())];
                distractors[d].insert(e);
            }
        }

        let mut subsets: Vec<BTreeSet<i64>> = blocks.into_iter().chain(distractors).collect();
        subsets.shuffle(&mut rng);

        let distinct: BTreeSet<&BTreeSet<i64>> = subsets.iter().collect();
        if distinct.len() != subsets.len() {
            continue;
        }
        return ExactCoverInstance::new(universe, subsets);
    }
    Err(Error::Generation(format!(
        "could not generate a duplicate-free instance for m = {m} within {GENERATE_MAX_RETRIES} retries"
    )))
}

/// Exhaustive backtracking oracle: returns a zero-objective assignment if one
/// exists, otherwise `None`. Covers the lowest-index uncovered element by each
/// candidate subset in turn and recurses.
pub fn exact_solve(instance: &ExactCoverInstance) -> Option<Assignment> {
    let n = instance.num_elements();
    let m = instance.num_subsets();
    // Subsets as element-position lists for O(1) coverage bookkeeping.
    let pos_of: std::collections::HashMap<i64, usize> = instance
        .universe()
        .iter()
        .enumerate()
        .map(|(j, &e)| (e, j))
        .collect();
    let subset_positions: Vec<Vec<usize>> = instance
        .subsets()
        .iter()
        .map(|s| s.iter().map(|e| pos_of[e]).collect())
        .collect();
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, ps) in subset_positions.iter().enumerate() {
        for &j in ps {
            covering[j].push(i);
        }
    }

    fn recurse(
        n: usize,
        subset_positions: &[Vec<usize>],
        covering: &[Vec<usize>],
        covered: &mut [bool],
        chosen: &mut Vec<usize>,
    ) -> bool {
        let Some(j) = (0..n).find(|&j| !covered[j]) else {
            return true;
        };
        for &i in &covering[j] {
            if subset_positions[i].iter().any(|&jj| covered[jj]) {
                continue;
            }
            for &jj in &subset_positions[i] {
                covered[jj] = true;
            }
            chosen.push(i);
            if recurse(n, subset_positions, covering, covered, chosen) {
                return true;
            }
            chosen.pop();
            for &jj in &subset_positions[i] {
                covered[jj] = false;
            }
        }
        false
    }

    let mut covered = vec![false; n];
    let mut chosen = Vec::new();
    if recurse(n, &subset_positions, &covering, &mut covered, &mut chosen) {
        let mut x = Assignment::zeros(m);
        for i in chosen {
            x.set(i, true);
        }
        Some(x)
    } else {
        None
    }
}
