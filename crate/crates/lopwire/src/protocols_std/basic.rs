use std::f64::consts::PI;

use crate::lop::{ElementalOp, Register, SystemLayout};
use crate::protocol::{ProtocolTree, Tree};
use crate::qcore::{CMat, C64};

/// Rows `<k^| = sum_j exp(2 pi i k j / d) / sqrt(d) <j|`.
pub fn fourier_kraus(d: usize) -> Vec<CMat> {
    let s = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|k| CMat::from_fn(1, d, |_, j| C64::from_polar(s, 2.0 * PI * (k * j % d) as f64 / d as f64)))
        .collect()
}

/// Destructive Fourier-basis measurement of a quantum register, outcome `k` on a fresh wire.
pub fn fourier_measure(target: &str, record: &str, d: usize) -> ElementalOp {
    ElementalOp::Observed {
        targets: vec![target.into()],
        kraus: fourier_kraus(d),
        outputs: Some(vec![]),
        ancilla: Some((record.into(), d)),
    }
}

fn fix_angles(k: usize, d: usize) -> Vec<f64> {
    (0..d).map(|j| -2.0 * PI * (k * j % d) as f64 / d as f64).collect()
}

pub fn b_layout(d: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W", d)]).expect("valid")
}

/// `B = sum_i |i><i|_W (x) |i>_Q`: fresh wire in `|0>`, a controlled shift
/// onto it, then forwarding it into `q`.
pub fn bijection_b(w: &str, q: &str, d: usize) -> ProtocolTree {
    let tmp = format!("{w}.copy");
    let table = (0..d * d).map(|x| (x / d) * d + (x / d + x % d) % d).collect();
    Tree::chain([
        ElementalOp::prepare_wire(&tmp, d),
        ElementalOp::Permutation { wires: vec![w.into(), tmp.clone()], table },
        ElementalOp::forward(&tmp, q),
    ])
}

/// Inverse of `B` on the correlated subspace: Fourier-measure `q` into `record`
/// and undo the phase `exp(2 pi i k j / d)` on `w`.
pub fn bijection_b_inv(w: &str, q: &str, record: &str, d: usize) -> ProtocolTree {
    let kids = (0..d)
        .map(|k| Tree::single(ElementalOp::Phase { wires: vec![w.into()], angles: fix_angles(k, d) }))
        .collect();
    Tree::node(fourier_measure(q, record, d), kids)
}

/// The probabilistic phase gate on wire `W` of a `b_layout(d)`.
#[derive(Clone, Debug)]
pub struct PhaseLoop {
    pub tree: ProtocolTree,
    pub rounds: usize,
    pub d: usize,
}

fn record(t: usize) -> String {
    format!("K{t}")
}

/// Each round copies `W` into a quantum register, applies the pending phase
/// there and measures it in the Fourier basis. Outcome 0 leaves the wanted
/// phase on `W`; outcome `k` leaves an extra `exp(2 pi i k j / d)`, so the
/// next round applies only `exp(-2 pi i k j / d)`. Remaining rounds after a
/// success prepare their record wires in `|0>` so all leaves share one layout.
pub fn phase_via_loop(phases: &[f64], d: usize, rounds: usize) -> PhaseLoop {
    assert!(rounds >= 1 && phases.len() == d);
    fn round(pending: Vec<f64>, t: usize, m: usize, d: usize) -> ProtocolTree {
        let u = CMat::from_fn(d, d, |r, c| if r == c { C64::from_polar(1.0, pending[r]) } else { C64::new(0.0, 0.0) });
        let kids = (0..d)
            .map(|k| {
                if k == 0 {
                    Tree::chain((t + 1..m).map(|s| ElementalOp::prepare_wire(&record(s), d)))
                } else if t + 1 < m {
                    round(fix_angles(k, d), t + 1, m, d)
                } else {
                    Tree::Leaf
                }
            })
            .collect();
        let meas = Tree::node(fourier_measure("L", &record(t), d), kids);
        bijection_b("W", "L", d)
            .then(Tree::single(ElementalOp::local(&["L"], u, None)))
            .then_with(&mut |_| meas.clone())
    }
    PhaseLoop { tree: round(phases.to_vec(), 0, rounds, d), rounds, d }
}

/// Whether an outcome path of `phase_via_loop` ends in a success.
pub fn phase_loop_success(tree: &ProtocolTree, path: &[usize]) -> bool {
    let mut t = tree;
    for &a in path {
        let Tree::Node { op, children } = t else { return false };
        if let ElementalOp::Observed { ancilla: Some((name, _)), targets, .. } = op {
            if !targets.is_empty() && name.starts_with('K') && a == 0 {
                return true;
            }
        }
        match children.get(&a) {
            Some(c) => t = c,
            None => return false,
        }
    }
    false
}
