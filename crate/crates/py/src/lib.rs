//! Python bindings: exact cover instances, the classical objective and
//! oracle, and single solver runs for each algorithm.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qara_core::bench::{run_algorithm, Algorithm, ExperimentConfig};
use qara_core::instance::{exact_solve, generate_instance, Assignment, ExactCoverInstance};
use qara_core::optimizer::OptimizerConfig;
use qara_core::Error;

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::InvalidArgument(_) | Error::InvalidConfig(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

// Vec<bool> converts to a Python list (Vec<u8> would become opaque bytes).
fn bits_to_py(x: &Assignment) -> Vec<bool> {
    x.0.clone()
}

/// An exact cover instance (universe plus ordered subset collection).
#[pyclass(name = "Instance", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: ExactCoverInstance,
}

#[pymethods]
impl PyInstance {
    #[new]
    fn new(universe: Vec<i64>, subsets: Vec<Vec<i64>>) -> PyResult<Self> {
        let subsets = subsets.into_iter().map(|s| s.into_iter().collect()).collect();
        ExactCoverInstance::new(universe, subsets)
            .map(|inner| PyInstance { inner })
            .map_err(to_py_err)
    }

    /// Seeded random instance with n = m elements, a planted exact cover and
    /// every element in at least two subsets.
    #[staticmethod]
    fn generate(m: usize, seed: u64) -> PyResult<Self> {
        generate_instance(m, seed)
            .map(|inner| PyInstance { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyInstance { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    #[getter]
    fn num_subsets(&self) -> usize {
        self.inner.num_subsets()
    }

    #[getter]
    fn universe(&self) -> Vec<i64> {
        self.inner.universe().to_vec()
    }

    #[getter]
    fn subsets(&self) -> Vec<Vec<i64>> {
        self.inner
            .subsets()
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect()
    }

    /// Classical objective of a 0/1 selection vector; 0 iff an exact cover.
    fn objective_value(&self, bits: Vec<u8>) -> PyResult<u64> {
        self.inner
            .objective_value(&Assignment::from(bits))
            .map_err(to_py_err)
    }

    fn coverage_counts(&self, bits: Vec<u8>) -> PyResult<Vec<u32>> {
        self.inner
            .coverage_counts(&Assignment::from(bits))
            .map_err(to_py_err)
    }

    /// Exact backtracking oracle; None when no exact cover exists.
    fn exact_solve(&self) -> Option<Vec<bool>> {
        exact_solve(&self.inner).map(|x| bits_to_py(&x))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, m={})",
            self.inner.num_elements(),
            self.inner.num_subsets()
        )
    }
}

/// Outcome of one solver run.
#[pyclass(name = "RunRecord")]
struct PyRunRecord {
    #[pyo3(get)]
    assignment: Vec<bool>,
    #[pyo3(get)]
    objective: u64,
    #[pyo3(get)]
    optimizer_iterations_total: usize,
    #[pyo3(get)]
    quantum_prunings: usize,
    #[pyo3(get)]
    rollbacks: usize,
    #[pyo3(get)]
    wall_ms: u128,
}

#[pymethods]
impl PyRunRecord {
    fn __repr__(&self) -> String {
        format!(
            "RunRecord(objective={}, iterations={}, quantum_prunings={}, rollbacks={})",
            self.objective, self.optimizer_iterations_total, self.quantum_prunings, self.rollbacks
        )
    }
}

/// Runs one algorithm ("qara", "qara-no-rollback", "crra", "rqaoa", "qaoa")
/// on an instance with a fixed seed.
#[pyfunction]
#[pyo3(signature = (instance, algorithm, seed=0, depth=1, max_iterations=500, learning_rate=0.05, no_rollback=false, theta_min=5))]
#[allow(clippy::too_many_arguments)]
fn solve(
    instance: &PyInstance,
    algorithm: &str,
    seed: u64,
    depth: usize,
    max_iterations: usize,
    learning_rate: f64,
    no_rollback: bool,
    theta_min: usize,
) -> PyResult<PyRunRecord> {
    let algo: Algorithm = algorithm.parse().map_err(to_py_err)?;
    let config = ExperimentConfig {
        algorithms: vec![algo],
        depth,
        optimizer: OptimizerConfig {
            learning_rate,
            max_iterations,
            ..OptimizerConfig::default()
        },
        rollback_enabled: !no_rollback,
        var_threshold: theta_min,
        ..ExperimentConfig::default()
    };
    let record = run_algorithm(&instance.inner, algo, &config, seed).map_err(to_py_err)?;
    Ok(PyRunRecord {
        assignment: bits_to_py(&record.assignment),
        objective: record.objective,
        optimizer_iterations_total: record.optimizer_iterations_total,
        quantum_prunings: record.quantum_prunings,
        rollbacks: record.rollbacks,
        wall_ms: record.wall_time.as_millis(),
    })
}

#[pymodule]
fn qara_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
