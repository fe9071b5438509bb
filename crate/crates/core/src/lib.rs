//! Exact cover solver suite built around quantum-assisted recursive pruning
//! (QARA), with plain QAOA, RQAOA and CRRA comparison baselines, an exact
//! state-vector simulator of the QAOA ansatz, an instance generator, an exact
//! oracle and a benchmark harness.

pub mod bench;
pub mod error;
pub mod hamiltonian;
pub mod instance;
pub mod optimizer;
pub mod pruning;
pub mod qara;
pub mod rqaoa;
pub mod simulator;

pub use error::{Error, Result};
