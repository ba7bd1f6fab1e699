//! Branching protocols: execution, the step normal form, and translation to
//! two-party LOCC.

mod locc;
mod normal_form;
mod reduce;
pub mod random;
mod tree;

pub use locc::{
    check_locality, copy_isometry, copy_name, doubled_layout, translate_to_locc, translation_distances, LopTag,
    LoccOp, LoccTree,
};
pub use normal_form::{
    compile_normal_form, compile_with_cap, verify_normal_form, NfNode, NfOutcome, NfVerdict, NormalForm,
    NormalFormStep, MAX_WIRE_DIM,
};
pub use reduce::{effective_channel, reduce_named, reduced_kraus};
pub use tree::{
    branch_maps, branch_operators, execute, execute_average, execute_branches, execute_sampled, to_channel, BranchOperator,
    BranchReport, Execution, Mode, OutcomePath, ProtocolTree, Tree, TreeOp, PRUNE_TOL,
};

use crate::lop::LopError;
use crate::qcore::QError;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("no branch for outcome {outcome} after path {path:?}")]
    MissingBranch { path: Vec<usize>, outcome: usize },
    #[error("branch for nonexistent outcome {outcome} after path {path:?}")]
    ExtraBranch { path: Vec<usize>, outcome: usize },
    #[error("layout drift mismatch: leaf {path:?} ends with a different layout")]
    LayoutDrift { path: Vec<usize> },
    #[error("relabeled wire dimension {0} exceeds the cap")]
    WireOverflow(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not a two-party wiring: {0}")]
    NotBipartite(String),
    #[error(transparent)]
    Lop(#[from] LopError),
    #[error(transparent)]
    Q(#[from] QError),
}
