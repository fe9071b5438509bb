//! Exact state-vector simulation of the QAOA ansatz for diagonal cost
//! Hamiltonians: Hadamard-initialized state, phase and mixer layers, and
//! expectation extraction.
//!
//! Bit convention: bit i of a basis index stores x_i (subset i).

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::instance::Assignment;

/// Hard cap on simulated qubits; 2^24 amplitudes is the memory ceiling.
pub const MAX_QUBITS: usize = 24;

/// Complex amplitudes over the 2^m computational basis states.
#[derive(Debug, Clone)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |<self|other>|, insensitive to global phase.
    pub fn overlap(&self, other: &QuantumState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

/// Variational angles for a p-layer ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidArgument(
                "gamma and beta arrays must be non-empty and of equal length".into(),
            ));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    /// Flat view (gamma_1..gamma_p, beta_1..beta_p) used by the optimizer.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(self.betas.iter()).copied().collect()
    }

    pub fn from_flat(p: usize, flat: &[f64]) -> Self {
        QaoaParams {
            gammas: flat[..p].to_vec(),
            betas: flat[p..2 * p].to_vec(),
        }
    }
}

/// Precomputed diagonal of the cost Hamiltonian: entry b is the energy of the
/// basis state with index b.
#[derive(Debug, Clone)]
pub struct DiagonalEnergies {
    num_qubits: usize,
    energies: Vec<f64>,
}

impl DiagonalEnergies {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
}

fn check_qubit_count(m: usize) -> Result<()> {
    if m == 0 || m > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "qubit count {m} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Uniform superposition |+>^m.
pub fn prepare_plus_state(m: usize) -> Result<QuantumState> {
    check_qubit_count(m)?;
    let dim = 1usize << m;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    Ok(QuantumState {
        num_qubits: m,
        amplitudes: vec![amp; dim],
    })
}

/// Tabulates the diagonal energies of `h` over m qubits.
pub fn precompute_diagonal(h: &IsingHamiltonian, m: usize) -> Result<DiagonalEnergies> {
    check_qubit_count(m)?;
    if h.active_vars().iter().any(|&i| i >= m) {
        return Err(Error::InvalidArgument(
            "hamiltonian index out of qubit range".into(),
        ));
    }
    let dim = 1usize << m;
    // Gray-code walk: successive indices differ in one bit, so each energy is
    // an O(degree) update of the previous one instead of a fresh O(terms) sum.
    let mut linear = vec![0.0f64; m];
    for (&i, &coef) in h.linear() {
        linear[i] = coef;
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (&(i, t), &coef) in h.quadratic() {
        adjacency[i].push((t, coef));
        adjacency[t].push((i, coef));
    }

    let spin = |g: usize, j: usize| 1.0 - 2.0 * ((g >> j) & 1) as f64;
    let mut energies = vec![0.0f64; dim];
    // all-spins-up energy at index 0
    let mut energy = h.constant()
        + linear.iter().sum::<f64>()
        + h.quadratic().values().sum::<f64>();
    energies[0] = energy;
    let mut prev_gray = 0usize;
    for k in 1..dim {
        let gray = k ^ (k >> 1);
        let t = k.trailing_zeros() as usize;
        let mut field = linear[t];
        for &(j, coef) in &adjacency[t] {
            field += coef * spin(prev_gray, j);
        }
        energy -= 2.0 * spin(prev_gray, t) * field;
        energies[gray] = energy;
        prev_gray = gray;
    }
    Ok(DiagonalEnergies {
        num_qubits: m,
        energies,
    })
}

/// e^{-i gamma H_C}: multiplies each amplitude by a phase; probabilities are
/// untouched.
pub fn apply_phase_layer(state: &mut QuantumState, diag: &DiagonalEnergies, gamma: f64) {
    assert_eq!(state.amplitudes.len(), diag.energies.len(), "dimension mismatch");
    let rotate = |(a, &e): (&mut Complex64, &f64)| {
        *a *= Complex64::from_polar(1.0, -gamma * e);
    };
    if state.amplitudes.len() < PARALLEL_DIM_THRESHOLD {
        state.amplitudes.iter_mut().zip(&diag.energies).for_each(rotate);
    } else {
        // Elementwise, so the split is bitwise-identical to the serial loop.
        state
            .amplitudes
            .par_iter_mut()
            .zip(&diag.energies)
            .for_each(rotate);
    }
}

/// Below this dimension the layer kernels run serially; thread fan-out costs
/// more than it saves on small states, and the benchmark harness already
/// parallelizes across runs at those sizes.
const PARALLEL_DIM_THRESHOLD: usize = 1 << 14;

/// e^{-i beta H_M} with H_M = sum_j X_j: a single-qubit rotation
/// [[cos b, -i sin b], [-i sin b, cos b]] on every qubit.
pub fn apply_mixer_layer(state: &mut QuantumState, beta: f64) {
    let (sin, cos) = beta.sin_cos();
    let c = Complex64::new(cos, 0.0);
    let mis = Complex64::new(0.0, -sin);
    let dim = state.amplitudes.len();
    let rotate_pair = |(a0, a1): (&mut Complex64, &mut Complex64)| {
        let (x0, x1) = (*a0, *a1);
        *a0 = c * x0 + mis * x1;
        *a1 = mis * x0 + c * x1;
    };
    for j in 0..state.num_qubits {
        let bit = 1usize << j;
        // Blocks of 2*bit amplitudes pair index b with b|bit across their two
        // halves; each block is independent of the others.
        let block = bit << 1;
        if dim < PARALLEL_DIM_THRESHOLD {
            for chunk in state.amplitudes.chunks_mut(block) {
                let (lo, hi) = chunk.split_at_mut(bit);
                lo.iter_mut().zip(hi.iter_mut()).for_each(rotate_pair);
            }
        } else {
            state.amplitudes.par_chunks_mut(block).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(bit);
                lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(rotate_pair);
            });
        }
    }
}

/// Evolves |+>^m through p alternating phase/mixer layers, phase first.
pub fn run_ansatz(diag: &DiagonalEnergies, params: &QaoaParams) -> Result<QuantumState> {
    let mut state = prepare_plus_state(diag.num_qubits)?;
    for (gamma, beta) in params.gammas.iter().zip(&params.betas) {
        apply_phase_layer(&mut state, diag, *gamma);
        apply_mixer_layer(&mut state, *beta);
    }
    Ok(state)
}

/// <H_C> = sum_b |a_b|^2 E_b.
pub fn expectation_energy(state: &QuantumState, diag: &DiagonalEnergies) -> f64 {
    state
        .amplitudes
        .iter()
        .zip(&diag.energies)
        .map(|(a, &e)| a.norm_sqr() * e)
        .sum()
}

/// <Z_i> = sum_b |a_b|^2 (-1)^{x_i}.
pub fn expectation_z(state: &QuantumState, i: usize) -> Result<f64> {
    if i >= state.num_qubits {
        return Err(Error::InvalidArgument(format!("qubit {i} out of range")));
    }
    let bit = 1usize << i;
    Ok(state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let sign = if b & bit == 0 { 1.0 } else { -1.0 };
            a.norm_sqr() * sign
        })
        .sum())
}

/// <Z_i Z_t> = sum_b |a_b|^2 (-1)^{x_i + x_t}.
pub fn expectation_zz(state: &QuantumState, i: usize, t: usize) -> Result<f64> {
    if i == t {
        return Err(Error::InvalidArgument("indices must differ".into()));
    }
    if i >= state.num_qubits || t >= state.num_qubits {
        return Err(Error::InvalidArgument("qubit index out of range".into()));
    }
    let mask = (1usize << i) | (1usize << t);
    Ok(state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let sign = if (b & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            a.norm_sqr() * sign
        })
        .sum())
}

/// Bitstring of the basis index maximizing |a_b|^2; ties go to the lowest
/// index.
pub fn most_probable_bitstring(state: &QuantumState) -> Assignment {
    let mut best = 0;
    let mut best_p = f64::NEG_INFINITY;
    for (b, a) in state.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p > best_p {
            best_p = p;
            best = b;
        }
    }
    Assignment::from_basis_index(state.num_qubits, best)
}

/// Measurement sampling over the amplitude distribution. Demonstration mode
/// only; no solver path or metric depends on it.
pub fn sample_bitstrings<R: Rng>(state: &QuantumState, shots: usize, rng: &mut R) -> Vec<Assignment> {
    let probs: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    (0..shots)
        .map(|_| {
            let mut r: f64 = rng.random();
            let mut idx = probs.len() - 1;
            for (b, &p) in probs.iter().enumerate() {
                if r < p {
                    idx = b;
                    break;
                }
                r -= p;
            }
            Assignment::from_basis_index(state.num_qubits, idx)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hamiltonian;
    use crate::testutil::example_instance;

    #[test]
    fn plus_state_amplitudes() {
        let s = prepare_plus_state(1).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            assert_eq!(a.im, 0.0);
        }
        let s3 = prepare_plus_state(3).unwrap();
        assert_eq!(s3.amplitudes().len(), 8);
        for a in s3.amplitudes() {
            assert!((a.re - 2f64.powf(-1.5)).abs() < 1e-12);
        }
        assert!((s3.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_range_enforced() {
        assert!(prepare_plus_state(0).is_err());
        assert!(prepare_plus_state(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn diagonal_matches_objective_on_example() {
        let inst = example_instance();
        let h = build_hamiltonian(&inst);
        let diag = precompute_diagonal(&h, 4).unwrap();
        for b in 0..16 {
            let x = Assignment::from_basis_index(4, b);
            let expected = inst.objective_value(&x).unwrap() as f64;
            assert!((diag.energies()[b] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_of_single_z() {
        let mut h = IsingHamiltonian::new(1);
        h.add_linear(0, 1.0);
        let diag = precompute_diagonal(&h, 1).unwrap();
        assert_eq!(diag.energies(), &[1.0, -1.0]);
    }

    #[test]
    fn diagonal_of_constant() {
        let mut h = IsingHamiltonian::new(2);
        h.add_constant(3.25);
        let diag = precompute_diagonal(&h, 2).unwrap();
        assert!(diag.energies().iter().all(|&e| e == 3.25));
    }

    #[test]
    fn phase_layer_preserves_probabilities() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let mut s = prepare_plus_state(4).unwrap();
        let before: Vec<f64> = s.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        apply_phase_layer(&mut s, &diag, 0.37);
        let after: Vec<f64> = s.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        assert_eq!(before, after);
        // gamma then -gamma restores the state.
        apply_phase_layer(&mut s, &diag, -0.37);
        let plus = prepare_plus_state(4).unwrap();
        for (a, b) in s.amplitudes().iter().zip(plus.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_angles_are_identity() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let params = QaoaParams::new(vec![0.0], vec![0.0]).unwrap();
        let s = run_ansatz(&diag, &params).unwrap();
        let plus = prepare_plus_state(4).unwrap();
        assert!((s.overlap(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_state_is_mixer_eigenstate() {
        let mut s = prepare_plus_state(3).unwrap();
        apply_mixer_layer(&mut s, 1.234);
        for a in s.amplitudes() {
            assert!((a.norm_sqr() - 0.125).abs() < 1e-12);
        }
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixer_at_pi_is_global_phase() {
        let mut s = prepare_plus_state(2).unwrap();
        apply_mixer_layer(&mut s, std::f64::consts::PI);
        let plus = prepare_plus_state(2).unwrap();
        assert!((s.overlap(&plus) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixer_is_pi_periodic_up_to_phase() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let mut a = run_ansatz(&diag, &QaoaParams::new(vec![0.8], vec![0.3]).unwrap()).unwrap();
        let b = run_ansatz(
            &diag,
            &QaoaParams::new(vec![0.8], vec![0.3 + std::f64::consts::PI]).unwrap(),
        )
        .unwrap();
        assert!((a.overlap(&b) - 1.0).abs() < 1e-10);
        apply_mixer_layer(&mut a, 0.0);
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_energy_on_uniform_state() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        let s = prepare_plus_state(4).unwrap();
        let mean = diag.energies().iter().sum::<f64>() / 16.0;
        assert!((expectation_energy(&s, &diag) - mean).abs() < 1e-12);
    }

    fn basis_state(m: usize, b: usize) -> QuantumState {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << m];
        amplitudes[b] = Complex64::new(1.0, 0.0);
        QuantumState {
            num_qubits: m,
            amplitudes,
        }
    }

    #[test]
    fn expectations_on_basis_states() {
        let inst = example_instance();
        let diag = precompute_diagonal(&build_hamiltonian(&inst), 4).unwrap();
        // Exact cover (1,0,1,0) has basis index 0b0101.
        let s = basis_state(4, 0b0101);
        assert!((expectation_energy(&s, &diag)).abs() < 1e-12);
        assert!((expectation_z(&s, 0).unwrap() + 1.0).abs() < 1e-12);
        assert!((expectation_z(&s, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation_zz(&s, 0, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation_zz(&s, 0, 1).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectations_on_plus_state_vanish() {
        let s = prepare_plus_state(3).unwrap();
        for i in 0..3 {
            assert!(expectation_z(&s, i).unwrap().abs() < 1e-12);
        }
        assert!(expectation_zz(&s, 0, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn expectation_index_checks() {
        let s = prepare_plus_state(2).unwrap();
        assert!(expectation_z(&s, 2).is_err());
        assert!(expectation_zz(&s, 1, 1).is_err());
    }

    #[test]
    fn ghz_correlation() {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 4];
        amplitudes[0b00] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amplitudes[0b11] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = QuantumState {
            num_qubits: 2,
            amplitudes,
        };
        assert!((expectation_zz(&s, 0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn most_probable_extraction() {
        let s = basis_state(3, 0b110);
        assert_eq!(most_probable_bitstring(&s).0, vec![false, true, true]);
        // Uniform state ties break to all-zeros.
        let plus = prepare_plus_state(3).unwrap();
        assert_eq!(most_probable_bitstring(&plus).0, vec![false; 3]);
        // 0.8|01> + 0.6|10>, x-bits of index 0b01 are (1,0).
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 4];
        amplitudes[0b01] = Complex64::new(0.8, 0.0);
        amplitudes[0b10] = Complex64::new(0.6, 0.0);
        let s = QuantumState {
            num_qubits: 2,
            amplitudes,
        };
        assert_eq!(most_probable_bitstring(&s).0, vec![true, false]);
    }

    #[test]
    fn sampling_tracks_distribution() {
        use rand::SeedableRng;
        let s = basis_state(2, 0b10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let samples = sample_bitstrings(&s, 50, &mut rng);
        assert!(samples.iter().all(|x| x.0 == vec![false, true]));
    }

    use crate::hamiltonian::IsingHamiltonian;
}
