use super::{bijection_b, bijection_b_inv, complete_permutation, fourier_measure};
use crate::lop::{iqo_map, wire_block, ElementalOp, Register, SystemLayout};
use crate::protocol::{execute_branches, reduce_named, NfOutcome, NormalFormStep, ProtocolError, ProtocolTree, Tree};
use crate::qcore::{basis_ket, herm_eig, CMat, QuantumChannel, C64};

/// Eigenvalues of `E0(i)^2` below this are treated as zero.
pub const PINV_CUTOFF: f64 = 1e-10;

/// `(S^{1/2}, (S^{1/2})^+)` from one truncated spectrum of `S`, so that
/// their product is an exact projector.
fn sqrt_and_pinv(s: &CMat) -> (CMat, CMat) {
    let (vals, vecs) = herm_eig(s);
    let n = s.nrows();
    let mut a = CMat::zeros(n, n);
    let mut b = CMat::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v > PINV_CUTOFF {
            let u = vecs.column(k);
            let p = u * u.adjoint();
            a += &p * C64::new(v.sqrt(), 0.0);
            b += p * C64::new(1.0 / v.sqrt(), 0.0);
        }
    }
    (a, b)
}

/// `[W1, Q]`, the layout IQO channels are given in.
pub fn iqo_layout(d: usize, dq: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W1", d), Register::quantum("Q", dq)]).expect("valid")
}

/// Wire maps of every Kraus operator, undefined columns filled injectively.
fn wire_maps(ch: &QuantumChannel, layout: &SystemLayout) -> Result<Vec<Vec<Option<usize>>>, ProtocolError> {
    ch.kraus()
        .iter()
        .map(|k| iqo_map(k, layout, layout).ok_or_else(|| ProtocolError::Unsupported("channel is not IQO".into())))
        .collect()
}

fn blocks(k: &CMat, f: &[usize], dq: usize) -> Vec<CMat> {
    (0..f.len()).map(|i| wire_block(k, f[i], i, dq, dq)).collect()
}

fn fill(f: &[Option<usize>]) -> Vec<usize> {
    f.iter().map(|v| v.unwrap_or(0)).collect()
}

/// Heralded implementation with success probability exactly `1/d`:
/// copy `W1` into `Q2` with `B`, apply `sum_i E_a(i) (x) |f_a(i)><i|` to `Q Q2`,
/// move `(f_a(i), i)` onto `(W1, W2)` with a permutation, undo the copy with
/// `B^-1`, then forward `W2` and measure it in the Fourier basis. Outcome 0 of
/// that last measurement is the success.
pub fn iqo_stochastic(ch: &QuantumChannel, d: usize, dq: usize) -> Result<ProtocolTree, ProtocolError> {
    let layout = iqo_layout(d, dq);
    if ch.in_dim() != d * dq || ch.out_dim() != d * dq {
        return Err(ProtocolError::Unsupported("channel does not match the layout".into()));
    }
    let maps: Vec<Vec<usize>> = wire_maps(ch, &layout)?.iter().map(|f| fill(f)).collect();
    let mut kraus = Vec::new();
    for (k, f) in ch.kraus().iter().zip(&maps) {
        let es = blocks(k, f, dq);
        let mut m = CMat::zeros(dq * d, dq * d);
        for i in 0..d {
            m += es[i].kronecker(&(basis_ket(d, f[i]) * basis_ket(d, i).adjoint()));
        }
        kraus.push(m);
    }
    let n = kraus.len();
    let kids = maps
        .iter()
        .map(|f| {
            let table = (0..d * d).map(|x| ((f[x / d] + x % d) % d) * d + x / d).collect();
            Tree::chain([ElementalOp::prepare_wire("W2", d), ElementalOp::Permutation { wires: vec!["W1".into(), "W2".into()], table }])
                .then(bijection_b_inv("W1", "Q2", "F1", d))
                .then(Tree::chain([ElementalOp::forward("W2", "Q3")]))
                .then(Tree::single(fourier_measure("Q3", "F2", d)))
        })
        .collect();
    let obs = ElementalOp::Observed {
        targets: vec!["Q".into(), "Q2".into()],
        kraus,
        outputs: None,
        ancilla: Some(("R".into(), n)),
    };
    Ok(bijection_b("W1", "Q2", d).then(Tree::node(obs, kids)))
}

#[derive(Clone, Debug)]
pub struct StochasticOutcome {
    pub success_probability: f64,
    /// Success-conditioned state on `[W1, Q]`.
    pub state: Option<CMat>,
}

/// Runs `iqo_stochastic` on `rho` (layout `[W1, Q]`) and collects the success branches.
pub fn stochastic_success(tree: &ProtocolTree, rho: &CMat, d: usize, dq: usize) -> Result<StochasticOutcome, ProtocolError> {
    let rep = execute_branches(tree, rho, &iqo_layout(d, dq))?;
    let mut p = 0.0;
    let mut acc = CMat::zeros(d * dq, d * dq);
    for b in rep.paths.iter().filter(|b| b.outcomes.last() == Some(&0)) {
        p += b.probability;
        acc += reduce_named(b.state.matrix(), &b.layout, &["W1", "Q"])? * C64::new(b.probability, 0.0);
    }
    let state = (p > 0.0).then(|| acc / C64::new(p, 0.0));
    Ok(StochasticOutcome { success_probability: p, state })
}

/// The two steps of the exact qubit-wire construction. Kraus operators whose
/// two wire columns collapse onto one row form `R`; the first stage keeps the
/// others and adds `K0 = sum_i |i><i| (x) E0(i)`, `E0(i) = (sum_R E(i)^dag E(i))^{1/2}`.
/// The second stage merges both levels and applies `E(i) E0(i)^+` for each
/// member of `R`, plus one outcome per level covering the kernel of `E0(i)`.
pub fn qubit_exact_stages(ch: &QuantumChannel, dq: usize) -> Result<(NormalFormStep, NormalFormStep), ProtocolError> {
    let layout = iqo_layout(2, dq);
    let maps = wire_maps(ch, &layout)?;
    let id = CMat::identity(dq, dq);
    let mut e0 = [CMat::zeros(dq, dq), CMat::zeros(dq, dq)];
    let mut rest = Vec::new();
    let mut merged = Vec::new();
    for (k, f) in ch.kraus().iter().zip(&maps) {
        match (f[0], f[1]) {
            (Some(a), Some(b)) if a == b => {
                let es = blocks(k, &[a, a], dq);
                for i in 0..2 {
                    e0[i] += es[i].adjoint() * &es[i];
                }
                merged.push((a, es));
            }
            _ => {
                let inj = complete_permutation(
                    &f.iter().enumerate().filter_map(|(i, v)| v.map(|j| (i, j))).collect::<Vec<_>>(),
                    2,
                )?;
                rest.push(NfOutcome { ops: blocks(k, &inj, dq), injection: inj, out_wire: 2, out_q: dq });
            }
        }
    }
    let (e0, pinv): (Vec<CMat>, Vec<CMat>) = e0.iter().map(sqrt_and_pinv).unzip();
    let mut first = vec![NfOutcome { injection: vec![0, 1], out_wire: 2, out_q: dq, ops: e0.clone() }];
    first.extend(rest);
    let mut second: Vec<NfOutcome> = merged
        .into_iter()
        .map(|(c, es)| NfOutcome {
            injection: vec![c],
            out_wire: 2,
            out_q: dq,
            ops: (0..2).map(|i| &es[i] * &pinv[i]).collect(),
        })
        .collect();
    for i in 0..2 {
        let mut ops = vec![CMat::zeros(dq, dq), CMat::zeros(dq, dq)];
        ops[i] = &id - &e0[i] * &pinv[i];
        second.push(NfOutcome { injection: vec![0], out_wire: 2, out_q: dq, ops });
    }
    Ok((
        NormalFormStep { in_wire: 2, in_q: dq, cut: 2, outcomes: first },
        NormalFormStep { in_wire: 2, in_q: dq, cut: 1, outcomes: second },
    ))
}

/// Elemental realization of one step on the single wire `W1` of dimension
/// `n` (input and output) and the quantum registers `qs`: copy the cut level
/// `c(i)` onto `W1` and `i` into a quantum register, apply
/// `sum_i E(i) (x) |sigma(c(i))><i|` there (outcome recorded in `R{tag}`),
/// relabel `W1` by `sigma`, and undo the copy with `B^-1` (record `F{tag}`).
/// `next(alpha)` continues after outcome `alpha`.
pub fn realize_step(
    step: &NormalFormStep,
    qs: &[&str],
    tag: &str,
    next: &mut dyn FnMut(usize) -> ProtocolTree,
) -> Result<ProtocolTree, ProtocolError> {
    let n = step.in_wire;
    if step.outcomes.iter().any(|o| o.out_wire != n || o.out_q != step.in_q) {
        return Err(ProtocolError::Unsupported("step changes dimensions".into()));
    }
    let (w2, q2, r, f) = (format!("T{tag}"), format!("U{tag}"), format!("R{tag}"), format!("F{tag}"));
    let c = |i: usize| step.level(i);
    let table = (0..n * n).map(|x| ((c(x / n) + x % n) % n) * n + x / n).collect();
    let mut kraus = Vec::new();
    let mut kids = Vec::new();
    for (a, o) in step.outcomes.iter().enumerate() {
        let mut m = CMat::zeros(step.in_q * n, step.in_q * n);
        for i in 0..n {
            m += o.ops[i].kronecker(&(basis_ket(n, o.injection[c(i)]) * basis_ket(n, i).adjoint()));
        }
        kraus.push(m);
        let relabel = complete_permutation(&o.injection.iter().enumerate().map(|(x, &y)| (x, y)).collect::<Vec<_>>(), n)?;
        let cont = next(a);
        kids.push(
            Tree::single(ElementalOp::Permutation { wires: vec!["W1".into()], table: relabel })
                .then(bijection_b_inv("W1", &q2, &f, n))
                .then(cont),
        );
    }
    let mut targets: Vec<String> = qs.iter().map(|s| s.to_string()).collect();
    targets.push(q2.clone());
    let m = kraus.len();
    let obs = ElementalOp::Observed { targets, kraus, outputs: None, ancilla: Some((r, m)) };
    Ok(Tree::chain([
        ElementalOp::prepare_wire(&w2, n),
        ElementalOp::Permutation { wires: vec!["W1".into(), w2.clone()], table },
        ElementalOp::forward(&w2, &q2),
    ])
    .then(Tree::node(obs, kids)))
}

/// Deterministic implementation of an IQO channel on a qubit wire, as the
/// realization of the two stages of `qubit_exact_stages`.
pub fn iqo_qubit_exact(ch: &QuantumChannel, dq: usize) -> Result<ProtocolTree, ProtocolError> {
    let (s1, s2) = qubit_exact_stages(ch, dq)?;
    let n2 = s2.outcomes.len();
    let stage2 = realize_step(&s2, &["Q"], "2", &mut |_| Tree::Leaf)?;
    realize_step(&s1, &["Q"], "1", &mut |a| {
        if a == 0 {
            stage2.clone()
        } else {
            Tree::chain([ElementalOp::prepare_wire("R2", n2), ElementalOp::prepare_wire("F2", 2)])
        }
    })
}
