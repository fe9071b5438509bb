//! Classical outer loop: random angle initialization, Adam on the expectation
//! F(gamma, beta) with finite-difference gradients, and a patience-based
//! stopping rule on the change in F.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulator::{expectation_energy, run_ansatz, DiagonalEnergies, QaoaParams, QuantumState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Convergence is declared when |dF| stays below this for
    /// `stop_patience` consecutive iterations.
    pub stop_tolerance: f64,
    pub stop_patience: usize,
    pub max_iterations: usize,
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            stop_tolerance: 0.01,
            stop_patience: 3,
            max_iterations: 500,
            fd_step: 1e-4,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stop_tolerance <= 0.0
            || self.stop_patience == 0
            || self.max_iterations < self.stop_patience
            || self.fd_step <= 0.0
            || self.learning_rate <= 0.0
        {
            return Err(Error::InvalidConfig(
                "optimizer config violates its invariants".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub params: QaoaParams,
    pub final_state: QuantumState,
    pub final_energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Draws gamma_i ~ U[0, 2pi) and beta_i ~ U[0, pi) for each layer.
pub fn init_params<R: Rng>(p: usize, rng: &mut R) -> QaoaParams {
    let gammas = (0..p).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let betas = (0..p).map(|_| rng.random_range(0.0..PI)).collect();
    QaoaParams { gammas, betas }
}

fn evaluate(diag: &DiagonalEnergies, p: usize, flat: &[f64]) -> f64 {
    let params = QaoaParams::from_flat(p, flat);
    let state = run_ansatz(diag, &params).expect("qubit count already validated");
    expectation_energy(&state, diag)
}

/// Central finite differences of F, one entry per flattened parameter.
pub fn gradient(diag: &DiagonalEnergies, params: &QaoaParams, fd_step: f64) -> Vec<f64> {
    let p = params.depth();
    let flat = params.to_flat();
    (0..flat.len())
        .map(|k| {
            let mut plus = flat.clone();
            plus[k] += fd_step;
            let mut minus = flat.clone();
            minus[k] -= fd_step;
            (evaluate(diag, p, &plus) - evaluate(diag, p, &minus)) / (2.0 * fd_step)
        })
        .collect()
}

/// Runs Adam from a fresh random initialization. Convergence is declared when
/// |F_k - F_{k-1}| < stop_tolerance holds for stop_patience consecutive
/// iterations, where F is evaluated once per iteration at the post-update
/// parameters.
pub fn optimize<R: Rng>(
    diag: &DiagonalEnergies,
    p: usize,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizationResult> {
    config.validate()?;
    let params = init_params(p, rng);
    optimize_from(diag, &params, config)
}

/// Adam loop from explicit starting parameters.
pub fn optimize_from(
    diag: &DiagonalEnergies,
    start: &QaoaParams,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    config.validate()?;
    let p = start.depth();
    let mut theta = start.to_flat();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];
    let mut f_prev = evaluate(diag, p, &theta);
    let mut streak = 0usize;
    let mut iterations = config.max_iterations;
    let mut converged = false;

    for k in 1..=config.max_iterations {
        let g = gradient(diag, &QaoaParams::from_flat(p, &theta), config.fd_step);
        let b1 = config.adam_beta1;
        let b2 = config.adam_beta2;
        for (i, gi) in g.iter().enumerate() {
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            let m_hat = m[i] / (1.0 - b1.powi(k as i32));
            let v_hat = v[i] / (1.0 - b2.powi(k as i32));
            theta[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
        }
        let f = evaluate(diag, p, &theta);
        if (f - f_prev).abs() < config.stop_tolerance {
            streak += 1;
        } else {
            streak = 0;
        }
        f_prev = f;
        if streak >= config.stop_patience {
            iterations = k;
            converged = true;
            break;
        }
    }

    let params = QaoaParams::from_flat(p, &theta);
    let final_state = run_ansatz(diag, &params)?;
    let final_energy = expectation_energy(&final_state, diag);
    Ok(OptimizationResult {
        params,
        final_state,
        final_energy,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, IsingHamiltonian};
    use crate::simulator::precompute_diagonal;
    use crate::testutil::example_instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_params_ranges_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = init_params(3, &mut rng);
        assert_eq!(a.gammas.len(), 3);
        assert_eq!(a.betas.len(), 3);
        assert!(a.gammas.iter().all(|&g| (0.0..2.0 * PI).contains(&g)));
        assert!(a.betas.iter().all(|&b| (0.0..PI).contains(&b)));
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let b = init_params(3, &mut rng2);
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_of_constant_hamiltonian_is_zero() {
        let mut h = IsingHamiltonian::new(3);
        h.add_constant(2.0);
        let diag = precompute_diagonal(&h, 3).unwrap();
        let params = QaoaParams::new(vec![0.7], vec![0.3]).unwrap();
        let g = gradient(&diag, &params, 1e-4);
        assert!(g.iter().all(|gi| gi.abs() < 1e-9));
    }

    #[test]
    fn gradient_matches_five_point_stencil() {
        let mut h = IsingHamiltonian::new(2);
        h.add_quadratic(0, 1, 0.5);
        h.add_constant(0.5);
        let diag = precompute_diagonal(&h, 2).unwrap();
        let params = QaoaParams::new(vec![0.7], vec![0.3]).unwrap();
        let g = gradient(&diag, &params, 1e-4);
        let flat = params.to_flat();
        let h_step = 1e-3;
        for (k, gk) in g.iter().enumerate() {
            let f = |delta: f64| {
                let mut t = flat.clone();
                t[k] += delta;
                evaluate(&diag, 1, &t)
            };
            let stencil = (-f(2.0 * h_step) + 8.0 * f(h_step) - 8.0 * f(-h_step) + f(-2.0 * h_step))
                / (12.0 * h_step);
            assert!((gk - stencil).abs() < 1e-6, "param {k}: {gk} vs {stencil}");
        }
    }

    #[test]
    fn gradient_is_pi_periodic_in_beta() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let params = QaoaParams::new(vec![1.1], vec![0.4]).unwrap();
        let shifted = QaoaParams::new(vec![1.1], vec![0.4 + PI]).unwrap();
        let g0 = gradient(&diag, &params, 1e-4);
        let g1 = gradient(&diag, &shifted, 1e-4);
        for (a, b) in g0.iter().zip(&g1) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn flat_landscape_converges_in_patience_iterations() {
        let mut h = IsingHamiltonian::new(2);
        h.add_constant(1.0);
        let diag = precompute_diagonal(&h, 2).unwrap();
        let config = OptimizerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let result = optimize(&diag, 1, &config, &mut rng).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, config.stop_patience);
        assert!((result.final_energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimizer_rarely_ends_above_start() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let config = OptimizerConfig::default();
        let mut improved = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = init_params(1, &mut rng);
            let initial = {
                let s = run_ansatz(&diag, &start).unwrap();
                expectation_energy(&s, &diag)
            };
            let result = optimize_from(&diag, &start, &config).unwrap();
            assert!(result.iterations <= config.max_iterations);
            if result.final_energy <= initial + 1e-12 {
                improved += 1;
            }
        }
        assert!(improved >= 15, "only {improved}/20 runs ended at or below start");
    }

    #[test]
    fn optimize_is_deterministic() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let config = OptimizerConfig::default();
        let a = optimize(&diag, 1, &config, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = optimize(&diag, 1, &config, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.final_energy, b.final_energy);
    }

    #[test]
    fn final_energy_matches_final_state() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let result = optimize(
            &diag,
            1,
            &OptimizerConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let recomputed = expectation_energy(&result.final_state, &diag);
        assert!((result.final_energy - recomputed).abs() < 1e-9);
    }

    #[test]
    fn invalid_config_rejected() {
        let diag = precompute_diagonal(&IsingHamiltonian::new(1), 1).unwrap();
        let bad = OptimizerConfig {
            stop_tolerance: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(optimize(&diag, 1, &bad, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
