//! Random permutation dynamics and the projected ensembles it produces.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: dense state vectors, model initial states, reduced density matrices.
//! - [`permdyn`]: seeded sampling and application of global and brickwork permutation unitaries.
//! - [`projens`]: measurement bases, projected ensembles, k-th moments and trace distances.
//! - [`resources`]: coherence, IPR and their ensemble averages.
//! - [`weingarten`]: set-partition lattice and exact/asymptotic Weingarten calculus on the
//!   symmetric group, together with the closed-form quantities built on it.
//! - [`analysis`]: sample statistics, crossing points, finite-size-scaling collapse.
//! - [`oracle`]: brute-force and Monte Carlo ground truth used by the tests.
//!
//! Basis convention: index `z` of a state on `N` qubits is read as the bit-string
//! `z_1 … z_N` with qubit 1 the most significant bit. Subsystem A is always the
//! leading `N_A` qubits, so a state matricizes as a `d_A × d_B` row-major array.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod permdyn;
pub mod projens;
pub mod qstate;
pub mod resources;
pub mod weingarten;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
