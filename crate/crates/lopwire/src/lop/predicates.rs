use super::SystemLayout;
use crate::qcore::{dephase, max_dist, min_eig, CMat, QuantumChannel, TOL};

/// Magnitude threshold for the zero pattern of wire blocks.
pub const PATTERN_TOL: f64 = 1e-10;

/// Kraus operator re-expressed with all wires first and all quantum registers second.
pub fn wq_kraus(k: &CMat, in_l: &SystemLayout, out_l: &SystemLayout) -> CMat {
    out_l.to_wq() * k * in_l.to_wq().adjoint()
}

/// Block `(row, col)` of a wire-then-quantum ordered operator.
pub fn wire_block(k_wq: &CMat, row: usize, col: usize, q_out: usize, q_in: usize) -> CMat {
    k_wq.view((row * q_out, col * q_in), (q_out, q_in)).into_owned()
}

/// For each wire column index, the wire rows where the block is nonzero.
pub fn wire_pattern(k_wq: &CMat, q_out: usize, q_in: usize) -> Vec<Vec<usize>> {
    let n_in = k_wq.ncols() / q_in;
    let n_out = k_wq.nrows() / q_out;
    (0..n_in)
        .map(|i| {
            (0..n_out)
                .filter(|&j| {
                    k_wq.view((j * q_out, i * q_in), (q_out, q_in)).iter().any(|z| z.norm() > PATTERN_TOL)
                })
                .collect()
        })
        .collect()
}

/// The wire map `f` of an operator `sum_i |f(i)><i| (x) E(i)`, `None` where the
/// column block vanishes; `None` overall if some column block hits two rows.
pub fn iqo_map(k: &CMat, in_l: &SystemLayout, out_l: &SystemLayout) -> Option<Vec<Option<usize>>> {
    let kw = wq_kraus(k, in_l, out_l);
    wire_pattern(&kw, out_l.quantum_dim(), in_l.quantum_dim())
        .into_iter()
        .map(|rows| match rows.len() {
            0 => Some(None),
            1 => Some(Some(rows[0])),
            _ => None,
        })
        .collect()
}

pub fn is_iqo_kraus(k: &CMat, layout: &SystemLayout) -> bool {
    iqo_map(k, layout, layout).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub pio: bool,
    pub sio: bool,
    pub iqo: bool,
}

fn injective(f: &[Option<usize>]) -> bool {
    let mut seen: Vec<usize> = f.iter().flatten().copied().collect();
    let n = seen.len();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == n
}

pub fn classify_channel(ch: &QuantumChannel, layout: &SystemLayout) -> Classification {
    classify_between(ch, layout, layout)
}

/// IQO: every wire column block lands in one row block. SIO: additionally each
/// wire map is injective. PIO: additionally all wire maps agree where defined.
pub fn classify_between(ch: &QuantumChannel, in_l: &SystemLayout, out_l: &SystemLayout) -> Classification {
    let maps: Option<Vec<_>> = ch.kraus().iter().map(|k| iqo_map(k, in_l, out_l)).collect();
    let Some(maps) = maps else {
        return Classification { pio: false, sio: false, iqo: false };
    };
    let sio = maps.iter().all(|f| injective(f));
    let pio = sio && {
        let n = in_l.wire_dim();
        let mut shared: Vec<Option<usize>> = vec![None; n];
        let mut ok = true;
        for f in &maps {
            for (i, v) in f.iter().enumerate() {
                if let Some(j) = v {
                    match shared[i] {
                        Some(s) if s != *j => ok = false,
                        _ => shared[i] = Some(*j),
                    }
                }
            }
        }
        ok && injective(&shared)
    };
    Classification { pio, sio, iqo: true }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CqReport {
    /// Largest wire-off-diagonal entry magnitude.
    pub wire_violation: f64,
    pub is_cq: bool,
    /// PPT test of every conditional quantum block across each single quantum
    /// register; `None` when not requested or vacuous (fewer than two quantum registers).
    pub cq_up_to_ppt: Option<bool>,
}

pub fn is_cq_state(rho: &CMat, layout: &SystemLayout) -> bool {
    cq_report(rho, layout, false).is_cq
}

pub fn cq_report(rho: &CMat, layout: &SystemLayout, separability: bool) -> CqReport {
    let dims = layout.dims();
    let wire_violation = match dephase(rho, &dims, &layout.wire_mask()) {
        Ok(d) => max_dist(rho, &d),
        Err(_) => f64::INFINITY,
    };
    let is_cq = wire_violation <= TOL;
    let qidx = layout.indices_of(super::RegKind::Quantum);
    let cq_up_to_ppt = (separability && qidx.len() >= 2).then(|| {
        is_cq && {
            let to = layout.to_wq();
            let r = &to * rho * to.adjoint();
            let qd = layout.quantum_dim();
            let qdims: Vec<usize> = qidx.iter().map(|&k| dims[k]).collect();
            (0..layout.wire_dim()).all(|m| {
                let block = r.view((m * qd, m * qd), (qd, qd)).into_owned();
                (0..qdims.len()).all(|k| min_eig(&partial_transpose(&block, &qdims, k)) >= -TOL)
            })
        }
    });
    CqReport { wire_violation, is_cq, cq_up_to_ppt }
}

pub fn partial_transpose(m: &CMat, dims: &[usize], k: usize) -> CMat {
    let total = m.nrows();
    let inner: usize = dims[k + 1..].iter().product();
    let d = dims[k];
    let digit = |x: usize| (x / inner) % d;
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        for c in 0..total {
            let (a, b) = (digit(r), digit(c));
            let r2 = r - a * inner + b * inner;
            let c2 = c - b * inner + a * inner;
            out[(r2, c2)] = m[(r, c)];
        }
    }
    out
}

