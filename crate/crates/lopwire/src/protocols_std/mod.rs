//! The named constructive protocols, each built only from elemental operations.

mod basic;
mod iqo;
mod prepare;
mod teleport;

pub use basic::{
    b_layout, bijection_b, bijection_b_inv, fourier_kraus, fourier_measure, phase_loop_success, phase_via_loop,
    PhaseLoop,
};
pub use iqo::{
    iqo_layout, iqo_qubit_exact, iqo_stochastic, qubit_exact_stages, realize_step, stochastic_success,
    StochasticOutcome,
};
pub use prepare::{prepare_ghz, prepare_w, Preparation, Topology};
pub use teleport::{teleport_branch_operators, teleport_channel, teleport_layout, teleported_channel, ChannelSpec};

use crate::protocol::ProtocolError;

/// Extends the partial map `pairs` (distinct sources and targets) to a
/// bijection of `0..d`, sending free sources to free targets in order.
pub fn complete_permutation(pairs: &[(usize, usize)], d: usize) -> Result<Vec<usize>, ProtocolError> {
    let mut table = vec![usize::MAX; d];
    let mut used = vec![false; d];
    for &(a, b) in pairs {
        if a >= d || b >= d || table[a] != usize::MAX || used[b] {
            return Err(ProtocolError::Unsupported(format!("partial map {pairs:?} is not injective in 0..{d}")));
        }
        table[a] = b;
        used[b] = true;
    }
    let mut free = (0..d).filter(|&b| !used[b]);
    for t in table.iter_mut() {
        if *t == usize::MAX {
            *t = free.next().expect("counts match");
        }
    }
    Ok(table)
}
