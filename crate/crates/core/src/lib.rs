//! Stabilizer-group learning for matrix product states.
//!
//! The crate provides an MPS simulator with Clifford/T gate application,
//! Pauli/tableau algebra, a biased Pauli sampler with provable branch
//! pruning, a generator-learning loop, brute-force oracles for validation,
//! and reproducible experiment drivers behind the `stabmps` binary.

extern crate blas_src;

pub mod clifford;
pub mod error;
pub mod experiments;
pub mod learner;
pub mod mps;
pub mod oracle;
pub mod pauli;
pub mod sampler;
pub mod tableau;

pub use error::{Error, Result};
