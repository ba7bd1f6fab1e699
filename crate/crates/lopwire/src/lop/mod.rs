//! Register layouts, the elemental operations and the CQ / IQO / SIO / PIO predicates.

mod layout;
mod ops;
mod predicates;
pub mod random;

pub use layout::{local_operator, register_permutation, LocalPlan, RegKind, Register, SystemLayout};
pub use ops::{elemental, ElementalOp, LocalAction};
pub use predicates::{
    classify_between, classify_channel, cq_report, iqo_map, is_cq_state, is_iqo_kraus, partial_transpose,
    wire_block, wire_pattern, wq_kraus, Classification, CqReport, PATTERN_TOL,
};

use crate::qcore::QError;

#[derive(Debug, thiserror::Error)]
pub enum LopError {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),
    #[error("register `{0}` has dimension 0")]
    ZeroDim(String),
    #[error("permutation or phase on quantum register `{0}`")]
    QuantumPermutation(String),
    #[error("cannot forward quantum register `{0}`")]
    ForwardQuantum(String),
    #[error("observed operation on wire register `{0}`")]
    ObservedOnWire(String),
    #[error("observed Kraus set is incomplete (residual {0:e})")]
    IncompleteObserved(f64),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Q(#[from] QError),
}
