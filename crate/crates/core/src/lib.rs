//! Partition-function zeros of one-dimensional spin chains.
//!
//! The crate simulates the ancilla-interferometry route to Lee-Yang and
//! Fisher zeros: a thermofield-double circuit prepares the thermal state, an
//! ancilla is coupled to the system through a controlled evolution, and the
//! ancilla coherence traces out the analytically continued partition
//! function. Every circuit result can be checked against the exact
//! diagonalization oracles in [`exact`].
//!
//! Basis convention used throughout: qubit 0 is the leftmost site and the
//! most significant bit of a basis index. A bit value of 0 is spin up
//! (`σ^z = +1`).
//!
//! Data-parallel loops (sweep points, grid cells, optimizer restarts, gate
//! kernels on large registers) go through rayon when the default `parallel`
//! feature is enabled and run sequentially otherwise.

pub mod circuit;
pub mod error;
pub mod exact;
pub mod fisher;
pub mod hamiltonian;
pub mod io;
pub mod leeyang;
pub mod linalg;
pub mod noise;
pub mod optim;
pub mod par;
pub mod postselect;
pub mod reconstruct;
pub mod tfd;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Version string written into output metadata headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
