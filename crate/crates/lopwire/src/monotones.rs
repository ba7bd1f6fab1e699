//! Coherence and entanglement quantities on wire/quantum layouts.

use serde_json::{json, Value};
use thiserror::Error;

use crate::lop::{LopError, RegKind, Register, SystemLayout};
use crate::protocols_std::{prepare_ghz, prepare_w, Topology};
use crate::qcore::{dephase, entropy, reduce, CMat, PureState, QError};

/// Purity threshold for treating a state as pure.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MonotoneError {
    #[error("state is not pure (purity {0})")]
    NotPure(f64),
    #[error("bad bipartition: {0}")]
    Partition(String),
    #[error(transparent)]
    Lop(#[from] LopError),
    #[error(transparent)]
    Q(#[from] QError),
}

fn check(rho: &CMat, layout: &SystemLayout) -> Result<(), MonotoneError> {
    if rho.nrows() != layout.total_dim() || rho.ncols() != layout.total_dim() {
        return Err(QError::Dim { expected: layout.total_dim(), got: rho.nrows() }.into());
    }
    Ok(())
}

/// `S(Delta(rho)) - S(rho)` in bits, `Delta` dephasing every wire register.
pub fn rel_ent_coherence(rho: &CMat, layout: &SystemLayout) -> Result<f64, MonotoneError> {
    check(rho, layout)?;
    let d = dephase(rho, &layout.dims(), &layout.wire_mask())?;
    Ok((entropy(&d) - entropy(rho)).max(0.0))
}

/// Sum of magnitudes of the entries whose row and column differ on the wires.
pub fn l1_coherence(rho: &CMat, layout: &SystemLayout) -> Result<f64, MonotoneError> {
    check(rho, layout)?;
    let d = dephase(rho, &layout.dims(), &layout.wire_mask())?;
    Ok((rho - d).iter().map(|z| z.norm()).sum())
}

fn purity(rho: &CMat) -> f64 {
    (rho * rho).trace().re
}

fn indices(layout: &SystemLayout, side: &[&str]) -> Result<Vec<usize>, MonotoneError> {
    let mut idx = Vec::new();
    for n in side {
        let k = layout.require(n)?;
        if idx.contains(&k) {
            return Err(MonotoneError::Partition(format!("`{n}` listed twice")));
        }
        idx.push(k);
    }
    idx.sort_unstable();
    Ok(idx)
}

/// Entropy of the reduced state of `side` for a pure `rho`, in bits.
pub fn ent_entropy(rho: &CMat, layout: &SystemLayout, side: &[&str]) -> Result<f64, MonotoneError> {
    check(rho, layout)?;
    let p = purity(rho);
    if (p - 1.0).abs() > PURITY_TOL {
        return Err(MonotoneError::NotPure(p));
    }
    let idx = indices(layout, side)?;
    Ok(entropy(&reduce(rho, &layout.dims(), &idx)?))
}

pub fn ent_entropy_pure(psi: &PureState, layout: &SystemLayout, side: &[&str]) -> Result<f64, MonotoneError> {
    ent_entropy(psi.density().matrix(), layout, side)
}

/// Both terms of the lower bound on the CQ relative entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct CqBound {
    /// Relative entropy of coherence of the wire marginal.
    pub wire_term: f64,
    /// Largest reduction entropy over bipartitions of the quantum registers,
    /// `None` when the quantum marginal is mixed.
    pub entanglement_term: Option<f64>,
    pub value: f64,
}

/// `max(R_Z(Tr_Q rho), E(Tr_W rho))`. Every quantum register counts as a
/// party; for more than two the maximum over bipartitions is itself a lower
/// bound on the multipartite relative entropy of entanglement.
pub fn cq_lower_bound(rho: &CMat, layout: &SystemLayout) -> Result<CqBound, MonotoneError> {
    check(rho, layout)?;
    let dims = layout.dims();
    let wires = layout.indices_of(RegKind::Wire);
    let qs = layout.indices_of(RegKind::Quantum);
    let wire_term = if wires.is_empty() {
        0.0
    } else {
        let wl = SystemLayout::new(wires.iter().map(|&k| layout.registers()[k].clone()).collect())?;
        rel_ent_coherence(&reduce(rho, &dims, &wires)?, &wl)?
    };
    let entanglement_term = if qs.is_empty() {
        Some(0.0)
    } else {
        let q = reduce(rho, &dims, &qs)?;
        if (purity(&q) - 1.0).abs() > PURITY_TOL {
            None
        } else {
            let qd: Vec<usize> = qs.iter().map(|&k| dims[k]).collect();
            let n = qs.len();
            let mut best: f64 = 0.0;
            // subsets containing register 0 cover every bipartition once
            for mask in 1..(1usize << n) {
                if mask & 1 == 0 || mask == (1 << n) - 1 {
                    continue;
                }
                let side: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
                best = best.max(entropy(&reduce(&q, &qd, &side)?));
            }
            Some(best)
        }
    };
    let value = wire_term.max(entanglement_term.unwrap_or(0.0));
    Ok(CqBound { wire_term, entanglement_term, value })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneReport {
    pub rel_ent_coherence: f64,
    pub l1_coherence: f64,
    /// Across the wires | quantum cut, for pure states with both kinds present.
    pub ent_entropy_pure: Option<f64>,
    pub cq_lower_bound: Option<f64>,
    /// `None` also when the quantum marginal is mixed.
    pub cq_entanglement_term: Option<f64>,
}

impl MonotoneReport {
    pub fn to_json(&self) -> Value {
        json!({
            "rel_ent_coherence": self.rel_ent_coherence,
            "l1_coherence": self.l1_coherence,
            "ent_entropy_pure": self.ent_entropy_pure,
            "cq_lower_bound": self.cq_lower_bound,
            "cq_entanglement_term": self.cq_entanglement_term,
        })
    }
}

pub fn monotone_report(rho: &CMat, layout: &SystemLayout) -> Result<MonotoneReport, MonotoneError> {
    let wires: Vec<&str> =
        layout.registers().iter().filter(|r| r.kind == RegKind::Wire).map(|r| r.name.as_str()).collect();
    let has_q = layout.registers().iter().any(|r| r.kind == RegKind::Quantum);
    let ent = if !wires.is_empty() && has_q && (purity(rho) - 1.0).abs() <= PURITY_TOL {
        Some(ent_entropy(rho, layout, &wires)?)
    } else {
        None
    };
    let b = cq_lower_bound(rho, layout)?;
    Ok(MonotoneReport {
        rel_ent_coherence: rel_ent_coherence(rho, layout)?,
        l1_coherence: l1_coherence(rho, layout)?,
        ent_entropy_pure: ent,
        cq_lower_bound: Some(b.value),
        cq_entanglement_term: b.entanglement_term,
    })
}

/// Coherence bookkeeping for GHZ and W states and the two conversion verdicts.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable {
    pub n: usize,
    /// Relative entropy of entanglement of `|GHZ_n>`.
    pub ghz_ree: f64,
    /// `(n-1) log2(n/(n-1))`, the relative entropy of entanglement of `|W_n>`.
    pub w_ree: f64,
    /// Coherence of the single-wire ancilla that prepares `|GHZ_n>`.
    pub ghz_input_coherence: f64,
    /// Coherence of the single-wire ancilla that prepares `|W_n>`.
    pub w_input_coherence: f64,
    /// Per-wire coherence of the two-wire ancillas for `|GHZ_3>` and `|W_3>`.
    pub ghz3_two_wire: Vec<f64>,
    pub w3_two_wire: Vec<f64>,
    /// The GHZ ancilla prepares `|GHZ_n>` but has less coherence than `|W_n>` has entanglement.
    pub ghz_to_w_blocked: bool,
    /// The `|W_3>` ancilla is less coherent on some wire than `|GHZ_3>` requires.
    pub w3_to_ghz3_blocked: bool,
}

impl CostTable {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "ghz_ree": self.ghz_ree,
            "w_ree": self.w_ree,
            "ghz_input_coherence": self.ghz_input_coherence,
            "w_input_coherence": self.w_input_coherence,
            "ghz3_two_wire_coherence": self.ghz3_two_wire,
            "w3_two_wire_coherence": self.w3_two_wire,
            "ghz_to_w_blocked": self.ghz_to_w_blocked,
            "w3_to_ghz3_blocked": self.w3_to_ghz3_blocked,
        })
    }
}

fn per_wire(rho: &CMat, layout: &SystemLayout) -> Result<Vec<f64>, MonotoneError> {
    let dims = layout.dims();
    (0..layout.len())
        .map(|k| {
            let r = &layout.registers()[k];
            let l = SystemLayout::new(vec![Register::wire(r.name.clone(), r.dim)])?;
            rel_ent_coherence(&reduce(rho, &dims, &[k])?, &l)
        })
        .collect()
}

/// Margin for the strict comparisons behind the verdicts.
const VERDICT_TOL: f64 = 1e-9;

pub fn ghz_w_cost_table(n: usize) -> Result<CostTable, MonotoneError> {
    if n < 3 {
        return Err(MonotoneError::Partition("cost table needs n >= 3".into()));
    }
    let prep_err = |e: crate::protocol::ProtocolError| MonotoneError::Partition(e.to_string());
    let ghz = prepare_ghz(n, Topology::SingleWire).map_err(prep_err)?;
    let w = prepare_w(n, Topology::SingleWire).map_err(prep_err)?;
    let ghz3 = prepare_ghz(3, Topology::Chain).map_err(prep_err)?;
    let w3 = prepare_w(3, Topology::Chain).map_err(prep_err)?;
    let qs = SystemLayout::new((1..=n).map(|k| Register::quantum(format!("Q{k}"), 2)).collect())?;
    let ghz_ree = ent_entropy_pure(&ghz.target, &qs, &["Q1"])?;
    let w_ree = (n as f64 - 1.0) * (n as f64 / (n as f64 - 1.0)).log2();
    let ghz_input_coherence = rel_ent_coherence(ghz.input.matrix(), &ghz.layout)?;
    let w_input_coherence = rel_ent_coherence(w.input.matrix(), &w.layout)?;
    let ghz3_two_wire = per_wire(ghz3.input.matrix(), &ghz3.layout)?;
    let w3_two_wire = per_wire(w3.input.matrix(), &w3.layout)?;
    let ghz_to_w_blocked = w_ree > ghz_input_coherence + VERDICT_TOL;
    let w3_to_ghz3_blocked = w3_two_wire.iter().zip(&ghz3_two_wire).any(|(a, b)| *a < *b - VERDICT_TOL);
    Ok(CostTable {
        n,
        ghz_ree,
        w_ree,
        ghz_input_coherence,
        w_input_coherence,
        ghz3_two_wire,
        w3_two_wire,
        ghz_to_w_blocked,
        w3_to_ghz3_blocked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::DensityMatrix;

    fn w1(d: usize) -> SystemLayout {
        SystemLayout::new(vec![Register::wire("W", d)]).unwrap()
    }

    #[test]
    fn plus_has_one_bit() {
        let rho = PureState::maximally_coherent(2).density();
        assert!((rel_ent_coherence(rho.matrix(), &w1(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((l1_coherence(rho.matrix(), &w1(2)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_has_none() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(rel_ent_coherence(rho.matrix(), &w1(2)).unwrap(), 0.0);
        assert_eq!(l1_coherence(rho.matrix(), &w1(2)).unwrap(), 0.0);
    }

    #[test]
    fn unbalanced_qubit() {
        let psi = PureState::from_real(&[1.0, 2f64.sqrt()]).unwrap();
        let want = 3f64.log2() - 2.0 / 3.0;
        assert!((rel_ent_coherence(psi.density().matrix(), &w1(2)).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn mixed_quantum_marginal_is_absent() {
        let l = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("A", 2), Register::quantum("B", 2)])
            .unwrap();
        let rho = DensityMatrix::maximally_mixed(8);
        assert_eq!(cq_lower_bound(rho.matrix(), &l).unwrap().entanglement_term, None);
    }

    #[test]
    fn cost_table_three() {
        let t = ghz_w_cost_table(3).unwrap();
        assert!((t.ghz_ree - 1.0).abs() < 1e-12);
        assert!((t.w_ree - 2.0 * 1.5f64.log2()).abs() < 1e-15);
        assert!(t.ghz_to_w_blocked && t.w3_to_ghz3_blocked);
    }
}
