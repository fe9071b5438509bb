//! The quantum-assisted recursive solver: alternating classical pruning and
//! quantum pruning (QAOA run, Z-bias extraction, argmax reduction, local
//! verification, rollback). Also hosts the CRRA baseline, which replaces the
//! quantum decision with a uniformly random selection.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hamiltonian::build_hamiltonian_from_cover;
use crate::instance::{is_completable, Assignment, ExactCoverInstance};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::pruning::{apply_exclusion, apply_selection, prune_to_fixpoint, ReducedProblem};
use crate::simulator::{expectation_z, precompute_diagonal};

#[derive(Debug, Clone)]
pub struct QaraConfig {
    pub depth: usize,
    pub optimizer: OptimizerConfig,
    pub rollback_enabled: bool,
    /// Overrides the per-phase rollback cap; the default rule is
    /// ceil(log2 |S|) at phase entry.
    pub rollback_cap_override: Option<usize>,
}

impl Default for QaraConfig {
    fn default() -> Self {
        QaraConfig {
            depth: 1,
            optimizer: OptimizerConfig::default(),
            rollback_enabled: true,
            rollback_cap_override: None,
        }
    }
}

/// Rollbacks actually used in one quantum-pruning phase, with the active
/// subset count at phase entry (which fixes the cap).
#[derive(Debug, Clone, Serialize)]
pub struct PhaseStats {
    pub entry_active: usize,
    pub rollbacks: usize,
}

/// Outcome of a single solver run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub assignment: Assignment,
    pub objective: u64,
    pub optimizer_iterations_total: usize,
    pub quantum_prunings: usize,
    pub rollbacks: usize,
    pub phase_log: Vec<PhaseStats>,
    #[serde(serialize_with = "serialize_millis")]
    pub wall_time: Duration,
}

fn serialize_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_millis())
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Uniform choice among the indices maximizing |values|. Exact float equality
/// defines a tie.
pub(crate) fn argmax_abs_tied<R: Rng>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().map(|v| v.abs()).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() == best)
        .map(|(q, _)| q)
        .collect();
    tied[rng.random_range(0..tied.len())]
}

/// Applies the bias-driven reduction: the active subset with the strongest
/// |bias| is selected when its bias is negative and excluded otherwise
/// (a zero bias counts as exclusion).
pub(crate) fn apply_bias_decision<R: Rng>(
    state: &ReducedProblem,
    biases: &[f64],
    rng: &mut R,
) -> Result<ReducedProblem> {
    let q = argmax_abs_tied(biases, rng);
    let original_index = state.active()[q].0;
    if biases[q] < 0.0 {
        apply_selection(state, original_index)
    } else {
        apply_exclusion(state, original_index)
    }
}

/// Ising form of a reduced problem, one qubit per active subset in active
/// order, over the still-uncovered elements.
pub(crate) fn reduced_hamiltonian(state: &ReducedProblem) -> crate::hamiltonian::IsingHamiltonian {
    let covering: Vec<Vec<usize>> = state
        .uncovered()
        .iter()
        .map(|e| {
            state
                .active()
                .iter()
                .enumerate()
                .filter(|(_, (_, s))| s.contains(e))
                .map(|(q, _)| q)
                .collect()
        })
        .collect();
    build_hamiltonian_from_cover(state.active().len(), &covering)
}

/// One quantum reduction attempt: full QAOA optimization on the reduced
/// problem, Z-bias per active subset, argmax reduction. Returns the candidate
/// state and the optimizer iteration count.
pub fn quantum_prune_attempt<R: Rng>(
    state: &ReducedProblem,
    config: &QaraConfig,
    rng: &mut R,
) -> Result<(ReducedProblem, usize)> {
    let m_active = state.active().len();
    let h = reduced_hamiltonian(state);
    let diag = precompute_diagonal(&h, m_active)?;
    let result = optimize(&diag, config.depth, &config.optimizer, rng)?;
    let biases: Vec<f64> = (0..m_active)
        .map(|q| expectation_z(&result.final_state, q).expect("qubit in range"))
        .collect();
    let candidate = apply_bias_decision(state, &biases, rng)?;
    Ok((candidate, result.iterations))
}

fn random_prune_attempt<R: Rng>(state: &ReducedProblem, rng: &mut R) -> Result<ReducedProblem> {
    let q = rng.random_range(0..state.active().len());
    let original_index = state.active()[q].0;
    apply_selection(state, original_index)
}

fn candidate_is_completable(candidate: &ReducedProblem) -> bool {
    is_completable(candidate.active().iter().map(|(_, s)| s), candidate.uncovered())
}

/// One quantum-pruning phase: repeats attempts from the phase-entry state
/// until local verification passes or the rollback cap is reached, then
/// accepts the last candidate regardless. Returns the accepted state, the
/// total optimizer iterations and the rollbacks used.
pub fn quantum_prune_phase<R: Rng>(
    state: &ReducedProblem,
    config: &QaraConfig,
    rng: &mut R,
) -> Result<(ReducedProblem, usize, usize)> {
    phase(state, config, rng, true)
}

fn phase<R: Rng>(
    state: &ReducedProblem,
    config: &QaraConfig,
    rng: &mut R,
    quantum: bool,
) -> Result<(ReducedProblem, usize, usize)> {
    let cap = if !config.rollback_enabled {
        0
    } else {
        config
            .rollback_cap_override
            .unwrap_or_else(|| ceil_log2(state.active().len()))
    };
    let mut iterations = 0;
    let mut rollbacks = 0;
    loop {
        let candidate = if quantum {
            let (c, iters) = quantum_prune_attempt(state, config, rng)?;
            iterations += iters;
            c
        } else {
            random_prune_attempt(state, rng)?
        };
        if candidate_is_completable(&candidate) || rollbacks >= cap {
            return Ok((candidate, iterations, rollbacks));
        }
        rollbacks += 1;
    }
}

fn run_recursive(
    instance: &ExactCoverInstance,
    config: &QaraConfig,
    seed: u64,
    quantum: bool,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = ReducedProblem::from_instance(instance);
    let mut iterations_total = 0;
    let mut rollbacks_total = 0;
    let mut quantum_prunings = 0;
    let mut phase_log = Vec::new();

    loop {
        let outcome = prune_to_fixpoint(&state);
        state = outcome.state;
        if state.is_solved() {
            break;
        }
        let entry_active = state.active().len();
        let (next, iterations, rollbacks) = phase(&state, config, &mut rng, quantum)?;
        state = next;
        iterations_total += iterations;
        rollbacks_total += rollbacks;
        quantum_prunings += 1;
        phase_log.push(PhaseStats {
            entry_active,
            rollbacks,
        });
        if state.is_solved() {
            break;
        }
    }

    let assignment = state.to_assignment();
    let objective = instance.objective_value(&assignment)?;
    Ok(RunRecord {
        assignment,
        objective,
        optimizer_iterations_total: iterations_total,
        quantum_prunings,
        rollbacks: rollbacks_total,
        phase_log,
        wall_time: start.elapsed(),
    })
}

/// Full QARA run: alternate classical pruning and quantum pruning until the
/// problem is resolved; undecided bits are 0.
pub fn qara_run(instance: &ExactCoverInstance, config: &QaraConfig, seed: u64) -> Result<RunRecord> {
    run_recursive(instance, config, seed, true)
}

/// CRRA baseline: identical control flow, but each pruning decision selects a
/// uniformly random active subset. No optimizer iterations are consumed.
pub fn crra_run(instance: &ExactCoverInstance, config: &QaraConfig, seed: u64) -> Result<RunRecord> {
    run_recursive(instance, config, seed, false)
}
