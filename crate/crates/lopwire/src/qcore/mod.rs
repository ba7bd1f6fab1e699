//! Dense complex linear algebra and channel calculus.

mod channel;
mod entropy;
pub mod json;
mod matrix;
pub mod random;
mod state;

pub(crate) use channel::choi_from_kraus;
pub use channel::{apply_channel, apply_kraus, choi_distance, choi_of, ChannelImage, QuantumChannel};
pub use entropy::{dephase, entropy, entropy_of_spectrum, relative_entropy};
pub use matrix::{
    basis_ket, dagger, herm_eig, is_hermitian, ket_from, kron_all, max_abs, max_dist, min_eig,
    partial_trace, pinv_herm, psd_sqrt, rank, reduce, trace_re, zeros,
};
pub use state::{DensityMatrix, PureState};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Tolerance for structural checks (completeness, positivity, patterns of states).
pub const TOL: f64 = 1e-9;
/// Tolerance for closed-form versus simulated identities.
pub const ORACLE_TOL: f64 = 1e-12;
/// Eigenvalues below this are treated as zero in entropy sums.
pub const EIG_CUTOFF: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum QError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("not a normalized pure state (norm {0})")]
    NotNormalized(f64),
    #[error("Kraus set is over-complete (largest eigenvalue of sum K^dag K is {0})")]
    OverComplete(f64),
    #[error("invalid Kraus set: {0}")]
    BadKraus(String),
    #[error("bad subsystem selection: {0}")]
    BadSubsystem(String),
    #[error("malformed matrix data: {0}")]
    Malformed(String),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}
