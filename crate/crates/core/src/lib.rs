//! Loschmidt echo of a central two-level system uniformly coupled to a
//! transverse-field XY spin-1/2 ring.
//!
//! The bath Hamiltonians conditioned on the qubit state differ only in the
//! field, `lambda` versus `lambda + delta`. Both are free-fermion problems, so
//! the echo factorizes over momentum pairs:
//!
//! ```text
//! L(t) = prod_k [1 - sin^2(2 dtheta_k) sin^2(eps1_k t)]
//! ```
//!
//! [`spectrum`] builds the per-mode table, [`echo`] evaluates echoes and the
//! qubit's reduced state, [`oracles`] checks the closed form by brute force,
//! and [`sweep`] produces parameter surfaces.

pub mod cli;
pub mod echo;
pub mod error;
pub mod model;
pub mod oracles;
pub mod spectrum;
pub mod sweep;

pub use echo::{
    decoherence_factor, echo_trace, excited_echo, log_loschmidt_echo, loschmidt_echo, purity,
    reduced_density, DensityMatrix2, EchoTrace,
};
pub use error::{Error, Result};
pub use model::{momentum, BathParams, CentralQubit, ExcitationPattern};
pub use spectrum::{bog_angle, build_mode_table, energy, ModeEntry, ModeTable};
pub use sweep::{quasiperiod, surface, surface_with_workers, write_grid, Axis, SweepGrid};
