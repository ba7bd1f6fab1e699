use std::f64::consts::PI;

use super::complete_permutation;
use super::teleport::bell_bra;
use crate::lop::{ElementalOp, Register, SystemLayout};
use crate::protocol::{execute_average, reduce_named, ProtocolError, ProtocolTree, Tree};
use crate::qcore::{CMat, DensityMatrix, PureState, C64};

/// How the wires connect the `n` parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// One wire shared by every party.
    SingleWire,
    /// Wire `W{j}` joins parties `j` and `j+1`.
    Chain,
}

/// A preparation protocol with the ancilla state it consumes.
#[derive(Clone, Debug)]
pub struct Preparation {
    pub tree: ProtocolTree,
    pub layout: SystemLayout,
    pub input: DensityMatrix,
    /// Quantum registers holding the prepared state, party order.
    pub outputs: Vec<String>,
    pub target: PureState,
}

impl Preparation {
    /// Averaged output state on `outputs`.
    pub fn run(&self) -> Result<CMat, ProtocolError> {
        let (rho, layout) = execute_average(&self.tree, self.input.matrix(), &self.layout)?;
        let keep: Vec<&str> = self.outputs.iter().map(String::as_str).collect();
        reduce_named(&rho, &layout, &keep)
    }

    pub fn fidelity(&self) -> Result<f64, ProtocolError> {
        let rho = self.run()?;
        let v = self.target.ket();
        Ok((v.adjoint() * rho * v)[(0, 0)].re)
    }
}

fn plus() -> PureState {
    PureState::maximally_coherent(2)
}

fn cnot(control: &str, target: &str) -> ElementalOp {
    ElementalOp::permutation(&[control, target], vec![0, 1, 3, 2])
}

fn doubling(w: &str) -> ProtocolTree {
    let copy = format!("{w}.d");
    Tree::chain([ElementalOp::prepare_wire(&copy, 2), cnot(w, &copy)])
}

/// `|i> -> |i>|i>` on a quantum qubit, outputs renamed.
fn copy_local(src: &str, a: &str, b: &str) -> ElementalOp {
    let mut v = CMat::zeros(4, 2);
    v[(0, 0)] = C64::new(1.0, 0.0);
    v[(3, 1)] = C64::new(1.0, 0.0);
    ElementalOp::local(&[src], v, Some(vec![(a.into(), 2), (b.into(), 2)]))
}

/// Moves the qubit `x` onto `far` (renamed `out`) using the maximally
/// entangled pair `(near, far)`: Bell measurement on `(near, x)` recorded in
/// `record`, then `sum_j exp(2 pi i k j / 2) |l+j><j|` on `far`.
fn teleport_qubit(x: &str, near: &str, far: &str, out: &str, record: &str) -> ProtocolTree {
    let d = 2;
    let bell = ElementalOp::Observed {
        targets: vec![near.into(), x.into()],
        kraus: (0..d * d).map(|m| bell_bra(d, m / d, m % d)).collect(),
        outputs: Some(vec![]),
        ancilla: Some((record.into(), d * d)),
    };
    let fixes = (0..d * d)
        .map(|m| {
            let (k, l) = (m / d, m % d);
            let mut c = CMat::zeros(d, d);
            for j in 0..d {
                c[((l + j) % d, j)] = C64::from_polar(1.0, 2.0 * PI * (k * j % d) as f64 / d as f64);
            }
            Tree::single(ElementalOp::local(&[far], c, Some(vec![(out.into(), d)])))
        })
        .collect();
    Tree::node(bell, fixes)
}

fn wires(names: &[(String, usize)]) -> SystemLayout {
    SystemLayout::new(names.iter().map(|(n, d)| Register::wire(n.clone(), *d)).collect()).expect("valid")
}

fn q_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("Q{k}")).collect()
}

/// `|GHZ_n>` on `Q1..Qn`. A single wire consumes `|+>` and is copied with
/// CNOTs before every copy is forwarded. The chain consumes `|+>` on each of
/// its `n-1` wires: every wire is doubled and its halves forwarded to both
/// ends, then each inner party copies its left half and teleports the copy
/// to the next party through its right pair.
pub fn prepare_ghz(n: usize, topology: Topology) -> Result<Preparation, ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::Unsupported("GHZ preparation needs n >= 2".into()));
    }
    let target = PureState::ghz(n);
    let outputs = q_names(n);
    match topology {
        Topology::SingleWire => {
            let mut ops = Vec::new();
            for k in 2..=n {
                let c = format!("C{k}");
                ops.push(ElementalOp::prepare_wire(&c, 2));
                ops.push(cnot("W", &c));
            }
            ops.push(ElementalOp::forward("W", "Q1"));
            for k in 2..=n {
                ops.push(ElementalOp::forward(&format!("C{k}"), &format!("Q{k}")));
            }
            Ok(Preparation {
                tree: Tree::chain(ops),
                layout: wires(&[("W".into(), 2)]),
                input: plus().density(),
                outputs,
                target,
            })
        }
        Topology::Chain => {
            let names: Vec<(String, usize)> = (1..n).map(|j| (format!("W{j}"), 2)).collect();
            let mut tree = Tree::Leaf;
            let right = |j: usize| if j == 1 { "Q1".to_string() } else { format!("Q{j}.r") };
            let left = |j: usize| if n == 2 { format!("Q{j}") } else { format!("Q{j}.l") };
            for j in 1..n {
                let w = format!("W{j}");
                tree = tree
                    .then(doubling(&w))
                    .then(Tree::chain([ElementalOp::forward(&w, &right(j)), ElementalOp::forward(&format!("{w}.d"), &left(j + 1))]));
            }
            for j in 2..n {
                let incoming = if j == 2 { left(2) } else { format!("Q{j}.in") };
                let x = format!("X{j}");
                let dest = if j + 1 == n { format!("Q{n}") } else { format!("Q{}.in", j + 1) };
                tree = tree
                    .then(Tree::single(copy_local(&incoming, &format!("Q{j}"), &x)))
                    .then(teleport_qubit(&x, &right(j), &left(j + 1), &dest, &format!("M{j}")));
            }
            let input = (1..n).fold(PureState::basis(1, 0), |acc, _| acc.kron(&plus()));
            Ok(Preparation { tree, layout: wires(&names), input: input.density(), outputs, target })
        }
    }
}

/// `|W_n>` on `Q1..Qn`. On a single wire the input `sum_i |i> / sqrt(n)` is
/// mapped by one permutation to the one-hot strings on `n` fresh qubit wires,
/// which are forwarded. The chain version exists for `n = 3` only and
/// consumes `|+> (x) (|0> + sqrt2 |1>) / sqrt3` on `W1, W2`.
pub fn prepare_w(n: usize, topology: Topology) -> Result<Preparation, ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::Unsupported("W preparation needs n >= 2".into()));
    }
    let target = PureState::w(n);
    let outputs = q_names(n);
    match topology {
        Topology::SingleWire => {
            let h = 1usize << n;
            let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i * h, 1 << (n - 1 - i))).collect();
            let table = complete_permutation(&pairs, n * h)?;
            let cs: Vec<String> = (1..=n).map(|k| format!("C{k}")).collect();
            let mut ops: Vec<ElementalOp> = cs.iter().map(|c| ElementalOp::prepare_wire(c, 2)).collect();
            let mut ws = vec!["W".to_string()];
            ws.extend(cs.iter().cloned());
            ops.push(ElementalOp::Permutation { wires: ws, table });
            for (c, q) in cs.iter().zip(&outputs) {
                ops.push(ElementalOp::forward(c, q));
            }
            Ok(Preparation {
                tree: Tree::chain(ops),
                layout: wires(&[("W".into(), n)]),
                input: PureState::maximally_coherent(n).density(),
                outputs,
                target,
            })
        }
        Topology::Chain => {
            if n != 3 {
                return Err(ProtocolError::Unsupported("two-wire W preparation is defined for n = 3 only".into()));
            }
            let mut iso = CMat::zeros(4, 2);
            iso[(0, 0)] = C64::new(1.0, 0.0);
            iso[(1, 1)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            iso[(2, 1)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let tree = doubling("W2")
                .then(Tree::chain([
                    ElementalOp::permutation(&["W2"], vec![1, 0]),
                    ElementalOp::forward("W2.d", "Q2.a"),
                    ElementalOp::local(&["Q2.a"], iso, Some(vec![("Q2".into(), 2), ("X2".into(), 2)])),
                    ElementalOp::forward("W2", "Q3"),
                ]))
                .then(doubling("W1"))
                .then(Tree::chain([ElementalOp::forward("W1", "Q1.a"), ElementalOp::forward("W1.d", "Q2.r")]))
                .then(teleport_qubit("X2", "Q2.r", "Q1.a", "Q1", "M"));
            let input = plus().kron(&PureState::from_real(&[1.0, 2f64.sqrt()])?);
            Ok(Preparation {
                tree,
                layout: wires(&[("W1".into(), 2), ("W2".into(), 2)]),
                input: input.density(),
                outputs,
                target,
            })
        }
    }
}
