//! Brute-force checks of the analytic pipeline.
//!
//! [`fock`] rebuilds each momentum pair's Bogoliubov problem in its 4-dimensional
//! Fock space; [`ed`] diagonalizes the full spin chain for small rings.

pub mod ed;
pub mod fock;
mod krylov;

pub use ed::{
    ed_ground_state, ed_loschmidt, EDResult, GroundState, SpinChain, ED_MAX_SITES, ED_TIME_SCALE,
};
pub use fock::{
    excited_mode_overlap, fock_mode_check, fock_mode_overlap, FockModeResult, ModePair,
};
