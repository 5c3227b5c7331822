//! Entanglement cost of small quantum channels and states.
//!
//! Dense complex linear algebra on density matrices, Kraus channels and their
//! Choi states, von Neumann and smooth log-rank entropies, entanglement of
//! formation (closed form for two qubits, decomposition search otherwise), and
//! calculators built on them: `E_C¹` bounds, noisy-storage security thresholds,
//! strong-converse error bounds and proof-overhead constants.

// range checks are written `!(x > 0.0)` on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod cli;
pub mod cost;
pub mod entanglement;
pub mod entropy;
pub mod error;
pub mod qmat;
pub mod random;

pub use error::{Error, Result};
