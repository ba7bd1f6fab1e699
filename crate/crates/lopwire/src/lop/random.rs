//! Random free states, IQO channels and elemental operations.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{ElementalOp, RegKind, SystemLayout};
use crate::qcore::random::{ginibre, random_channel, random_density};
use crate::qcore::{basis_ket, pinv_herm, psd_sqrt, CMat, QuantumChannel, C64};

/// Random `sum_m p_m |m><m|_W (x) sigma_m` in layout order.
pub fn random_cq_state(layout: &SystemLayout, rng: &mut impl Rng) -> CMat {
    let n = layout.wire_dim();
    let q = layout.quantum_dim();
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let tot: f64 = w.iter().sum();
    let mut r = CMat::zeros(n * q, n * q);
    for m in 0..n {
        let s = random_density(q, rng);
        let b = s.matrix() * C64::new(w[m] / tot, 0.0);
        r.view_mut((m * q, m * q), (q, q)).copy_from(&b);
    }
    let to = layout.to_wq();
    to.adjoint() * r * to
}

/// Random IQO channel on a wire of dimension `d` (first) and a quantum
/// register of dimension `dq`. Outcome 0 has a bijective wire map; the others
/// have random maps with fibers of size at most `dq`. Blocks inside a
/// collapsing fiber start with distinct basis projectors so their ranges are
/// orthogonal, and a final right-multiplication restores completeness.
pub fn random_iqo_channel(d: usize, dq: usize, n_kraus: usize, rng: &mut impl Rng) -> QuantumChannel {
    let mut maps = Vec::with_capacity(n_kraus);
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    maps.push(perm);
    while maps.len() < n_kraus {
        let f: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
        if (0..d).all(|j| f.iter().filter(|&&x| x == j).count() <= dq) {
            maps.push(f);
        }
    }
    let mut blocks: Vec<Vec<CMat>> = Vec::new();
    for f in &maps {
        let mut es: Vec<CMat> = (0..d).map(|_| ginibre(dq, dq, rng)).collect();
        for j in 0..d {
            let fiber: Vec<usize> = (0..d).filter(|&i| f[i] == j).collect();
            if fiber.len() >= 2 {
                let mut slots: Vec<usize> = (0..dq).collect();
                slots.shuffle(rng);
                for (&i, &k) in fiber.iter().zip(&slots) {
                    let p = basis_ket(dq, k) * basis_ket(dq, k).adjoint();
                    es[i] = p * &es[i];
                }
            }
        }
        blocks.push(es);
    }
    let fix: Vec<CMat> = (0..d)
        .map(|i| {
            let mut s = CMat::zeros(dq, dq);
            for es in &blocks {
                s += es[i].adjoint() * &es[i];
            }
            pinv_herm(&psd_sqrt(&s), 1e-12)
        })
        .collect();
    let kraus = maps
        .iter()
        .zip(&blocks)
        .map(|(f, es)| {
            let mut k = CMat::zeros(d * dq, d * dq);
            for i in 0..d {
                let e = &es[i] * &fix[i];
                k.view_mut((f[i] * dq, i * dq), (dq, dq)).copy_from(&e);
            }
            k
        })
        .collect();
    QuantumChannel::new(kraus).expect("equal shapes")
}

/// A random elemental operation valid on `layout`. Fresh register names use
/// `prefix` and the counter. Operations that would push the total dimension
/// above `max_dim` are avoided.
pub fn random_op(
    layout: &SystemLayout,
    rng: &mut impl Rng,
    prefix: &str,
    counter: &mut usize,
    max_dim: usize,
) -> ElementalOp {
    let wires = layout.indices_of(RegKind::Wire);
    let quantum = layout.indices_of(RegKind::Quantum);
    let regs = layout.registers();
    loop {
        match rng.random_range(0..4) {
            0 if !wires.is_empty() => {
                let w = &regs[*wires.choose(rng).unwrap()];
                let mut t: Vec<usize> = (0..w.dim).collect();
                t.shuffle(rng);
                return ElementalOp::Permutation { wires: vec![w.name.clone()], table: t };
            }
            1 if !wires.is_empty() => {
                let w = &regs[*wires.choose(rng).unwrap()];
                let a = (0..w.dim).map(|_| rng.random_range(-3.2..3.2)).collect();
                return ElementalOp::Phase { wires: vec![w.name.clone()], angles: a };
            }
            2 if !quantum.is_empty() && layout.total_dim() * 2 <= max_dim => {
                let q = &regs[*quantum.choose(rng).unwrap()];
                let ch = random_channel(q.dim, q.dim, 2, rng);
                *counter += 1;
                return ElementalOp::Observed {
                    targets: vec![q.name.clone()],
                    kraus: ch.into_kraus(),
                    outputs: None,
                    ancilla: Some((format!("{prefix}{counter}"), 2)),
                };
            }
            3 if !wires.is_empty() => {
                let w = &regs[*wires.choose(rng).unwrap()];
                *counter += 1;
                return ElementalOp::Forward { source: w.name.clone(), target: format!("{prefix}{counter}") };
            }
            _ if wires.is_empty() && quantum.is_empty() => {
                *counter += 1;
                return ElementalOp::prepare_wire(&format!("{prefix}{counter}"), 2);
            }
            _ => {}
        }
    }
}
