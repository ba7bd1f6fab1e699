use std::f64::consts::PI;

use super::bijection_b;
use crate::lop::{ElementalOp, Register, SystemLayout};
use crate::protocol::{branch_maps, effective_channel, reduced_kraus, ProtocolError, ProtocolTree, Tree};
use crate::qcore::{CMat, PureState, QuantumChannel, C64, TOL};

/// A target channel on `W1 (x) Q` (wire index first).
#[derive(Clone, Debug)]
pub struct ChannelSpec {
    pub target: QuantumChannel,
    pub wire_dim: usize,
    pub quantum_dim: usize,
}

impl ChannelSpec {
    pub fn new(target: QuantumChannel, wire_dim: usize, quantum_dim: usize) -> Result<Self, ProtocolError> {
        let n = wire_dim * quantum_dim;
        if target.in_dim() != n || target.out_dim() != n {
            return Err(ProtocolError::Unsupported(format!("channel must act on dimension {n}")));
        }
        if !target.is_full(TOL) {
            return Err(ProtocolError::Unsupported("target channel is not trace preserving".into()));
        }
        Ok(Self { target, wire_dim, quantum_dim })
    }
}

/// `[W1, Q, W2]`; `W2` carries the resource state.
pub fn teleport_layout(d: usize, dq: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W1", d), Register::quantum("Q", dq), Register::wire("W2", d)])
        .expect("valid")
}

/// `<b(k,l)|` on two registers of dimension `d`, with
/// `|b(k,l)> = d^{-1/2} sum_j exp(2 pi i k j / d) |j>|l+j mod d>`.
pub(super) fn bell_bra(d: usize, k: usize, l: usize) -> CMat {
    let s = 1.0 / (d as f64).sqrt();
    let mut m = CMat::zeros(1, d * d);
    for j in 0..d {
        m[(0, j * d + (l + j) % d)] = C64::from_polar(s, -2.0 * PI * (k * j % d) as f64 / d as f64);
    }
    m
}

/// Implements the target with a maximally coherent `W2`: forward `W1`, apply
/// the target locally (outcome recorded in `R`), copy `W2` into a quantum
/// register with `B`, Bell-measure it against the forwarded `W1` (outcome
/// `k d + l` in `M`), then correct `W2` with a phase and a shift.
pub fn teleport_channel(spec: &ChannelSpec) -> ProtocolTree {
    let d = spec.wire_dim;
    let kraus = spec.target.kraus().to_vec();
    let m = kraus.len();
    let bell = ElementalOp::Observed {
        targets: vec!["Q3".into(), "Q2".into()],
        kraus: (0..d * d).map(|x| bell_bra(d, x / d, x % d)).collect(),
        outputs: Some(vec![]),
        ancilla: Some(("M".into(), d * d)),
    };
    let corrections = (0..d * d)
        .map(|x| {
            let (k, l) = (x / d, x % d);
            Tree::chain([
                ElementalOp::Phase {
                    wires: vec!["W2".into()],
                    angles: (0..d).map(|j| 2.0 * PI * (k * j % d) as f64 / d as f64).collect(),
                },
                ElementalOp::Permutation { wires: vec!["W2".into()], table: (0..d).map(|j| (l + j) % d).collect() },
            ])
        })
        .collect();
    let tail = bijection_b("W2", "Q3", d).then(Tree::node(bell, corrections));
    Tree::node(
        ElementalOp::forward("W1", "Q2"),
        vec![Tree::node(
            ElementalOp::Observed { targets: vec!["Q2".into(), "Q".into()], kraus, outputs: None, ancilla: Some(("R".into(), m)) },
            vec![tail; m],
        )],
    )
}

fn embed(d: usize, dq: usize, ancilla: &PureState) -> CMat {
    CMat::identity(d * dq, d * dq).kronecker(&ancilla.ket())
}

/// The implemented map `W1 (x) Q -> W2 (x) Q` for a given `W2` state, records traced out.
pub fn teleported_channel(spec: &ChannelSpec, ancilla: &PureState) -> Result<QuantumChannel, ProtocolError> {
    let (d, dq) = (spec.wire_dim, spec.quantum_dim);
    let tree = teleport_channel(spec);
    effective_channel(&tree, &teleport_layout(d, dq), &embed(d, dq, ancilla), &["W2", "Q"])
}

/// `(alpha, k d + l, operator W1 (x) Q -> W2 (x) Q)` for every branch with a
/// maximally coherent `W2`; each operator should equal `K_alpha / d`.
pub fn teleport_branch_operators(spec: &ChannelSpec) -> Result<Vec<(usize, usize, CMat)>, ProtocolError> {
    let (d, dq) = (spec.wire_dim, spec.quantum_dim);
    let tree = teleport_channel(spec);
    let e = embed(d, dq, &PureState::maximally_coherent(d));
    let mut out = Vec::new();
    for b in branch_maps(&tree, &teleport_layout(d, dq), &e)? {
        let ks = reduced_kraus(&b.kraus, &b.layout, &["W2", "Q"])?;
        let mut sum = CMat::zeros(d * dq, d * dq);
        for k in ks {
            sum += k;
        }
        out.push((b.outcomes[1], b.outcomes[5], sum));
    }
    Ok(out)
}
