//! RQAOA baseline: recursive variable elimination driven by ZZ correlations,
//! residual solve at or below the variable threshold, and backtracking through
//! the recorded substitutions.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, IsingHamiltonian};
use crate::instance::{Assignment, ExactCoverInstance};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::qara::RunRecord;
use crate::simulator::{expectation_zz, precompute_diagonal};

/// Spin relation s_eliminated = sign * s_retained recorded at one reduction
/// step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionRecord {
    pub eliminated: usize,
    pub retained: usize,
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct RqaoaConfig {
    pub depth: usize,
    pub optimizer: OptimizerConfig,
    /// Residual solve threshold on the number of remaining variables.
    pub var_threshold: usize,
}

impl Default for RqaoaConfig {
    fn default() -> Self {
        RqaoaConfig {
            depth: 1,
            optimizer: OptimizerConfig::default(),
            var_threshold: 5,
        }
    }
}

/// Compacts the active variables of `h` onto qubits 0..k for simulation.
fn compact(h: &IsingHamiltonian, vars: &BTreeSet<usize>) -> (IsingHamiltonian, Vec<usize>) {
    let order: Vec<usize> = vars.iter().copied().collect();
    let qubit_of: BTreeMap<usize, usize> =
        order.iter().enumerate().map(|(q, &v)| (v, q)).collect();
    let mut out = IsingHamiltonian::new(order.len());
    out.add_constant(h.constant());
    for (&i, &coef) in h.linear() {
        out.add_linear(qubit_of[&i], coef);
    }
    for (&(i, t), &coef) in h.quadratic() {
        out.add_quadratic(qubit_of[&i], qubit_of[&t], coef);
    }
    (out, order)
}

/// One reduction step: QAOA on the compacted Hamiltonian, ZZ correlation per
/// cross-term, strongest-|M| pair wins (random tie-break), and the lower index
/// of the pair is substituted away. Returns the rewritten Hamiltonian, the
/// substitution record, and the optimizer iterations consumed.
pub fn rqaoa_reduce_step<R: Rng>(
    h: &IsingHamiltonian,
    config: &RqaoaConfig,
    rng: &mut R,
) -> Result<(IsingHamiltonian, SubstitutionRecord, usize)> {
    if !h.has_cross_terms() {
        return Err(Error::InvalidArgument(
            "reduce step requires at least one cross-term".into(),
        ));
    }
    let vars = h.active_vars();
    let (compacted, order) = compact(h, &vars);
    let diag = precompute_diagonal(&compacted, order.len())?;
    let result = optimize(&diag, config.depth, &config.optimizer, rng)?;

    let pairs: Vec<(usize, usize)> = h.quadratic().keys().copied().collect();
    let qubit_of: BTreeMap<usize, usize> =
        order.iter().enumerate().map(|(q, &v)| (v, q)).collect();
    let correlations: Vec<f64> = pairs
        .iter()
        .map(|&(i, t)| {
            expectation_zz(&result.final_state, qubit_of[&i], qubit_of[&t])
                .expect("compacted indices in range")
        })
        .collect();
    let chosen = crate::qara::argmax_abs_tied(&correlations, rng);
    let (i, t) = pairs[chosen];
    let sign: i8 = if correlations[chosen] < 0.0 { -1 } else { 1 };
    let record = SubstitutionRecord {
        eliminated: i.min(t),
        retained: i.max(t),
        sign,
    };
    let rewritten = h.substitute_variable(record.eliminated, record.retained, record.sign)?;
    Ok((rewritten, record, result.iterations))
}

/// Solves the residual Hamiltonian. A cross-term-free residual is separable
/// and solved exactly by s_i = -sgn(h_i) (x_i = 0 for vanished coefficients).
/// A residual that still has cross-terms (at most `var_threshold` variables
/// remain) is handed to the random reduction: one uniformly random bit
/// pattern, the classical-random analogue used for the final reduced problem.
pub fn solve_residual<R: Rng>(
    h: &IsingHamiltonian,
    var_threshold: usize,
    rng: &mut R,
) -> BTreeMap<usize, bool> {
    let vars: Vec<usize> = h.active_vars().into_iter().collect();
    let mut bits = BTreeMap::new();
    if !h.has_cross_terms() {
        for &v in &vars {
            let coef = h.linear().get(&v).copied().unwrap_or(0.0);
            // choose spin minimizing coef * s; coef = 0 -> x = 0
            bits.insert(v, coef > 0.0);
        }
    } else {
        debug_assert!(
            vars.len() <= var_threshold,
            "residual with cross-terms above threshold"
        );
        for &v in &vars {
            bits.insert(v, rng.random_bool(0.5));
        }
    }
    bits
}

/// Resolves the substitution chain last-to-first on top of the residual bits,
/// yielding a complete length-m assignment (never-appearing variables stay 0).
pub fn backtrack(
    num_vars: usize,
    records: &[SubstitutionRecord],
    residual: &BTreeMap<usize, bool>,
) -> Result<Assignment> {
    let mut bits: BTreeMap<usize, bool> = residual.clone();
    for record in records.iter().rev() {
        let &retained = bits.get(&record.retained).ok_or_else(|| {
            Error::Internal(format!(
                "retained variable {} unresolved at backtrack",
                record.retained
            ))
        })?;
        let value = if record.sign == 1 { retained } else { !retained };
        bits.insert(record.eliminated, value);
    }
    let mut x = Assignment::zeros(num_vars);
    for (&i, &b) in &bits {
        x.set(i, b);
    }
    Ok(x)
}

/// Full RQAOA run on an instance.
pub fn rqaoa_run(
    instance: &ExactCoverInstance,
    config: &RqaoaConfig,
    seed: u64,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = build_hamiltonian(instance);
    let mut records = Vec::new();
    let mut iterations_total = 0;

    while h.active_vars().len() > config.var_threshold && h.has_cross_terms() {
        let (next, record, iterations) = rqaoa_reduce_step(&h, config, &mut rng)?;
        h = next;
        records.push(record);
        iterations_total += iterations;
    }

    let mut residual = solve_residual(&h, config.var_threshold, &mut rng);
    // A variable can vanish from H entirely when all its terms cancel during
    // substitution; any such non-eliminated variable resolves to 0.
    let eliminated: std::collections::BTreeSet<usize> =
        records.iter().map(|r| r.eliminated).collect();
    for v in 0..instance.num_subsets() {
        if !eliminated.contains(&v) {
            residual.entry(v).or_insert(false);
        }
    }
    let assignment = backtrack(instance.num_subsets(), &records, &residual)?;
    let objective = instance.objective_value(&assignment)?;
    Ok(RunRecord {
        assignment,
        objective,
        optimizer_iterations_total: iterations_total,
        quantum_prunings: 0,
        rollbacks: 0,
        phase_log: Vec::new(),
        wall_time: start.elapsed(),
    })
}
