//! Ising form of the exact cover objective: a constant plus linear Z and
//! quadratic ZZ coefficients, with the variable substitution used by RQAOA.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::Assignment;

const ZERO_EPS: f64 = 0.0;

/// Diagonal Hamiltonian H = constant + sum h_i Z_i + sum J_{it} Z_i Z_t.
///
/// Quadratic keys are stored with i < t; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian {
    num_vars: usize,
    constant: f64,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl IsingHamiltonian {
    pub fn new(num_vars: usize) -> Self {
        IsingHamiltonian {
            num_vars,
            constant: 0.0,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, h: f64) {
        assert!(i < self.num_vars, "index {i} out of range");
        let entry = self.linear.entry(i).or_insert(0.0);
        *entry += h;
        if entry.abs() <= ZERO_EPS {
            self.linear.remove(&i);
        }
    }

    pub fn add_quadratic(&mut self, i: usize, t: usize, j: f64) {
        assert!(i != t, "quadratic term requires distinct indices");
        assert!(i < self.num_vars && t < self.num_vars, "index out of range");
        let key = (i.min(t), i.max(t));
        let entry = self.quadratic.entry(key).or_insert(0.0);
        *entry += j;
        if entry.abs() <= ZERO_EPS {
            self.quadratic.remove(&key);
        }
    }

    /// True iff any ZZ term remains.
    pub fn has_cross_terms(&self) -> bool {
        !self.quadratic.is_empty()
    }

    /// Indices that still appear with a nonzero coefficient.
    pub fn active_vars(&self) -> BTreeSet<usize> {
        let mut vars: BTreeSet<usize> = self.linear.keys().copied().collect();
        for &(i, t) in self.quadratic.keys() {
            vars.insert(i);
            vars.insert(t);
        }
        vars
    }

    /// Diagonal energy on the basis state |x>, via Z_i|x> = (-1)^{x_i}|x>.
    pub fn energy_of_bitstring(&self, x: &Assignment) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::InvalidArgument(format!(
                "assignment length {} does not match {} variables",
                x.len(),
                self.num_vars
            )));
        }
        let spin = |i: usize| if x.bit(i) { -1.0 } else { 1.0 };
        let mut e = self.constant;
        for (&i, &h) in &self.linear {
            e += h * spin(i);
        }
        for (&(i, t), &j) in &self.quadratic {
            e += j * spin(i) * spin(t);
        }
        Ok(e)
    }

    /// Rewrites every occurrence of Z_{eliminated} as sign * Z_{retained}.
    /// The eliminated index no longer appears afterwards.
    pub fn substitute_variable(
        &self,
        eliminated: usize,
        retained: usize,
        sign: i8,
    ) -> Result<IsingHamiltonian> {
        if eliminated == retained {
            return Err(Error::InvalidArgument(
                "cannot substitute a variable with itself".into(),
            ));
        }
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        let s = f64::from(sign);
        let mut out = IsingHamiltonian::new(self.num_vars);
        out.constant = self.constant;
        for (&i, &h) in &self.linear {
            if i == eliminated {
                out.add_linear(retained, s * h);
            } else {
                out.add_linear(i, h);
            }
        }
        for (&(i, t), &j) in &self.quadratic {
            if i == eliminated || t == eliminated {
                let other = if i == eliminated { t } else { i };
                if other == retained {
                    // Z_r * Z_r = I
                    out.constant += s * j;
                } else {
                    out.add_quadratic(retained, other, s * j);
                }
            } else {
                out.add_quadratic(i, t, j);
            }
        }
        Ok(out)
    }
}

/// Compiles the classical objective of an element/subset system into Ising
/// form: for each element covered by the k subsets D, the squared penalty
/// (sum_{i in D} x_i - 1)^2 expands to a constant 1 - k/2 + k(k-1)/4, linear
/// coefficients (2-k)/2 on each i in D, and 1/2 on each unordered pair in D.
///
/// `covering_sets` lists, per element, the variable indices covering it.
pub fn build_hamiltonian_from_cover(num_vars: usize, covering_sets: &[Vec<usize>]) -> IsingHamiltonian {
    let mut h = IsingHamiltonian::new(num_vars);
    for cover in covering_sets {
        let k = cover.len() as f64;
        h.add_constant(1.0 - k / 2.0 + k * (k - 1.0) / 4.0);
        for &i in cover {
            h.add_linear(i, (2.0 - k) / 2.0);
        }
        for (a, &i) in cover.iter().enumerate() {
            for &t in &cover[a + 1..] {
                h.add_quadratic(i, t, 0.5);
            }
        }
    }
    h
}

/// Ising form of a full instance, one variable per subset.
pub fn build_hamiltonian(instance: &crate::instance::ExactCoverInstance) -> IsingHamiltonian {
    let covering: Vec<Vec<usize>> = instance
        .universe()
        .iter()
        .map(|e| {
            instance
                .subsets()
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains(e))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    build_hamiltonian_from_cover(instance.num_subsets(), &covering)
}
