//! Simulation and verification engine for local operations with physical wires.
//!
//! Wires are registers with a fixed incoherent basis; quantum registers are
//! unrestricted. Protocols are trees of four elemental operations (wire
//! permutations, wire phases, observed quantum operations and forwarding of a
//! wire into a quantum register). The crate executes such protocols on dense
//! density matrices, checks the structural results about them numerically,
//! and computes the coherence and entanglement quantities used to compare
//! resource states.
//!
//! Indices are 0-based throughout and logarithms are base 2.

pub mod cxample;
pub mod distill;
pub mod lop;
pub mod monotones;
pub mod protocol;
pub mod protocols_std;
pub mod qcore;

pub use qcore::{CMat, C64};
