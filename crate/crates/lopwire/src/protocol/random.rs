//! Random elemental protocol trees with a branch-independent layout history.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ProtocolTree, Tree};
use crate::lop::random::random_op;
use crate::lop::{ElementalOp, SystemLayout};
use crate::qcore::random::random_channel;

/// Same kind and registers as `op`, fresh random parameters.
pub fn resample(op: &ElementalOp, rng: &mut impl Rng) -> ElementalOp {
    match op {
        ElementalOp::Permutation { wires, table } => {
            let mut t = table.clone();
            t.shuffle(rng);
            ElementalOp::Permutation { wires: wires.clone(), table: t }
        }
        ElementalOp::Phase { wires, angles } => ElementalOp::Phase {
            wires: wires.clone(),
            angles: angles.iter().map(|_| rng.random_range(-3.2..3.2)).collect(),
        },
        ElementalOp::Observed { targets, kraus, outputs, ancilla } if kraus[0].nrows() == kraus[0].ncols() && kraus[0].nrows() > 1 => {
            let d = kraus[0].nrows();
            ElementalOp::Observed {
                targets: targets.clone(),
                kraus: random_channel(d, d, kraus.len(), rng).into_kraus(),
                outputs: outputs.clone(),
                ancilla: ancilla.clone(),
            }
        }
        other => other.clone(),
    }
}

/// Tree of the given depth. Every node at depth `t` has the same kind and
/// registers, so all leaves share one layout; parameters differ per node.
pub fn random_tree(layout: &SystemLayout, depth: usize, max_dim: usize, rng: &mut impl Rng) -> ProtocolTree {
    let mut templates = Vec::with_capacity(depth);
    let mut l = layout.clone();
    let mut counter = 0;
    for _ in 0..depth {
        let op = random_op(&l, rng, "X", &mut counter, max_dim);
        l = op.apply(&l).expect("random operations are valid").1;
        templates.push(op);
    }
    fn build(ts: &[ElementalOp], rng: &mut impl Rng) -> ProtocolTree {
        match ts.split_first() {
            None => Tree::Leaf,
            Some((t, rest)) => {
                let op = resample(t, rng);
                let n = op.n_outcomes();
                let kids = (0..n).map(|_| build(rest, rng)).collect();
                Tree::node(op, kids)
            }
        }
    }
    build(&templates, rng)
}
