//! Quantum reservoir computing for ground-state energies of particles in
//! one-dimensional speckle potentials.
//!
//! The crate is split into:
//! - [`linalg`], [`pauli`], [`state`]: dense complex matrices, Pauli strings,
//!   density matrices and propagators;
//! - [`reservoir`]: the transverse-field Ising reservoir and its input loop;
//! - [`speckle`] and [`dataset`]: speckle generation, the finite-difference
//!   ground-state solver and dataset files;
//! - [`readout`]: polynomial feature maps, least squares and metrics;
//! - [`pipeline`]: config files, the worker pool and the batch commands.

pub mod dataset;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod pipeline;
pub mod readout;
pub mod reservoir;
pub mod speckle;
pub mod state;
pub mod tridiag;

pub use error::{QrcError, Result};
