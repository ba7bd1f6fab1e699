//! Translation of wire protocols between two parties into two-party LOCC
//! protocols acting on maximally correlated copies of every wire.
//!
//! Wire `W` becomes the quantum registers `W^1` (party 1) and `W^2` (party 2),
//! and the wire state `sum r_ij |i><j|` becomes `sum r_ij |ii><jj|`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde_json::{json, Value};

use super::{branch_maps, ProtocolError, ProtocolTree, Tree, TreeOp};
use crate::lop::{register_permutation, ElementalOp, LocalAction, RegKind, Register, SystemLayout};
use crate::qcore::json::{matrix_from_json, matrix_to_json};
use crate::qcore::{basis_ket, herm_eig, max_dist, CMat, C64, TOL};

/// How an LOCC outcome maps back to the outcome path of the source protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LopTag {
    /// The outcome index is the source outcome.
    Carries,
    /// Every outcome stands for this source outcome.
    Fixed(usize),
    /// Bookkeeping outcome with no source counterpart.
    Extra,
}

/// Local Kraus set of one party. With `outputs` the targets are replaced by
/// fresh registers appended at the end; otherwise they are mapped in place.
#[derive(Clone, Debug, PartialEq)]
pub struct LoccOp {
    pub party: usize,
    pub targets: Vec<String>,
    pub outputs: Option<Vec<(String, usize)>>,
    pub kraus: Vec<CMat>,
    pub tag: LopTag,
}

pub type LoccTree = Tree<LoccOp>;

impl TreeOp for LoccOp {
    fn n_outcomes(&self) -> usize {
        self.kraus.len()
    }

    fn action(&self, layout: &SystemLayout) -> Result<LocalAction, ProtocolError> {
        let idx = self
            .targets
            .iter()
            .map(|t| layout.require(t))
            .collect::<Result<Vec<_>, _>>()?;
        let (out, out_idx) = match &self.outputs {
            None => (layout.clone(), idx.clone()),
            Some(os) => {
                let mut out = layout.without(&idx);
                let mut oi = Vec::new();
                for (n, d) in os {
                    out.push(Register::quantum(n.clone(), *d))?;
                    oi.push(out.len() - 1);
                }
                (out, oi)
            }
        };
        let din: usize = idx.iter().map(|&k| layout.registers()[k].dim).product();
        let mut gram = CMat::zeros(din, din);
        for k in &self.kraus {
            gram += k.adjoint() * k;
        }
        let res = max_dist(&gram, &CMat::identity(din, din));
        if res > TOL {
            return Err(ProtocolError::Lop(crate::lop::LopError::IncompleteObserved(res)));
        }
        Ok(LocalAction::new(layout, &idx, out, &out_idx, self.kraus.clone())?)
    }

    fn path_label(&self, outcome: usize) -> Option<usize> {
        match self.tag {
            LopTag::Carries => Some(outcome),
            LopTag::Fixed(a) => Some(a),
            LopTag::Extra => None,
        }
    }

    fn to_json(&self) -> Value {
        let tag = match self.tag {
            LopTag::Carries => json!("carries"),
            LopTag::Fixed(a) => json!({"fixed": a}),
            LopTag::Extra => json!("extra"),
        };
        let mut v = json!({
            "party": self.party,
            "targets": self.targets,
            "kraus": self.kraus.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "tag": tag,
        });
        if let Some(o) = &self.outputs {
            v["outputs"] = o.iter().map(|(n, d)| json!({"name": n, "dim": d})).collect();
        }
        v
    }

    fn from_json(v: &Value) -> Result<Self, ProtocolError> {
        let bad = |m: &str| ProtocolError::Lop(crate::lop::LopError::Invalid(format!("LOCC operation JSON: {m}")));
        let party = v.get("party").and_then(Value::as_u64).ok_or_else(|| bad("party"))? as usize;
        let targets = v
            .get("targets")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("targets"))?
            .iter()
            .map(|x| x.as_str().map(String::from).ok_or_else(|| bad("target")))
            .collect::<Result<_, _>>()?;
        let kraus = v
            .get("kraus")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("kraus"))?
            .iter()
            .map(|m| matrix_from_json(m).map_err(ProtocolError::from))
            .collect::<Result<_, _>>()?;
        let outputs = match v.get("outputs") {
            None | Some(Value::Null) => None,
            Some(o) => Some(
                o.as_array()
                    .ok_or_else(|| bad("outputs"))?
                    .iter()
                    .map(|r| {
                        let n = r.get("name").and_then(Value::as_str).ok_or_else(|| bad("output name"))?;
                        let d = r.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("output dim"))?;
                        Ok((n.to_string(), d as usize))
                    })
                    .collect::<Result<_, ProtocolError>>()?,
            ),
        };
        let tag = match v.get("tag") {
            Some(Value::String(s)) if s == "carries" => LopTag::Carries,
            Some(Value::String(s)) if s == "extra" => LopTag::Extra,
            Some(t) => LopTag::Fixed(t.get("fixed").and_then(Value::as_u64).ok_or_else(|| bad("tag"))? as usize),
            None => return Err(bad("tag")),
        };
        Ok(Self { party, targets, outputs, kraus, tag })
    }
}

pub fn copy_name(wire: &str, party: usize) -> String {
    format!("{wire}^{party}")
}

/// The LOCC layout: every wire replaced in place by its two copies.
pub fn doubled_layout(layout: &SystemLayout) -> Result<SystemLayout, ProtocolError> {
    let mut regs = Vec::new();
    for r in layout.registers() {
        match r.kind {
            RegKind::Wire => {
                regs.push(Register::quantum(copy_name(&r.name, 1), r.dim));
                regs.push(Register::quantum(copy_name(&r.name, 2), r.dim));
            }
            RegKind::Quantum => regs.push(r.clone()),
        }
    }
    Ok(SystemLayout::new(regs)?)
}

/// Isometry `|i>_W -> |i>_{W^1} |i>_{W^2}` on every wire, from `layout` to `doubled_layout(layout)`.
pub fn copy_isometry(layout: &SystemLayout) -> CMat {
    let mut m = CMat::identity(1, 1);
    for r in layout.registers() {
        let f = match r.kind {
            RegKind::Wire => {
                let mut c = CMat::zeros(r.dim * r.dim, r.dim);
                for i in 0..r.dim {
                    c[(i * r.dim + i, i)] = C64::new(1.0, 0.0);
                }
                c
            }
            RegKind::Quantum => CMat::identity(r.dim, r.dim),
        };
        m = m.kronecker(&f);
    }
    m
}

fn fourier_bra(d: usize, k: usize) -> CMat {
    let s = 1.0 / (d as f64).sqrt();
    CMat::from_fn(1, d, |_, j| C64::from_polar(s, 2.0 * PI * (k * j) as f64 / d as f64))
}

fn fourier_fix(d: usize, k: usize) -> CMat {
    CMat::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, -2.0 * PI * (k * r) as f64 / d as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn op(party: usize, targets: Vec<String>, outputs: Option<Vec<(String, usize)>>, kraus: Vec<CMat>, tag: LopTag) -> LoccOp {
    LoccOp { party, targets, outputs, kraus, tag }
}

/// Translates with the replacement rules: wire permutations on both copies,
/// wire phases on the first copy, observed operations locally with the outcome
/// copied into both ancilla copies, and forwarding by a Fourier measurement of
/// the far copy followed by a phase correction and relabeling of the near copy.
///
/// `party_of` assigns every quantum register of `layout`, and every register
/// created by forwarding, to party 1 or 2.
pub fn translate_to_locc(
    tree: &ProtocolTree,
    layout: &SystemLayout,
    party_of: &BTreeMap<String, usize>,
) -> Result<(LoccTree, SystemLayout), ProtocolError> {
    let mut parties = party_of.clone();
    for r in layout.registers() {
        if r.kind == RegKind::Quantum && !matches!(parties.get(&r.name), Some(1) | Some(2)) {
            return Err(ProtocolError::NotBipartite(format!("register `{}` has no party", r.name)));
        }
    }
    let t = translate(tree, layout, &mut parties)?;
    Ok((t, doubled_layout(layout)?))
}

fn translate(
    tree: &ProtocolTree,
    layout: &SystemLayout,
    parties: &mut BTreeMap<String, usize>,
) -> Result<LoccTree, ProtocolError> {
    let Tree::Node { op: lop, children } = tree else {
        return Ok(Tree::Leaf);
    };
    let (_, out) = TreeOp::apply(lop, layout)?;
    let sub = |a: usize, parties: &mut BTreeMap<String, usize>| -> Result<LoccTree, ProtocolError> {
        let c = children.get(&a).ok_or(ProtocolError::MissingBranch { path: vec![], outcome: a })?;
        translate(c, &out, parties)
    };
    let dims = |names: &[String]| -> usize {
        names.iter().map(|n| layout.get(n).map(|r| r.dim).unwrap_or(1)).product()
    };
    Ok(match lop {
        ElementalOp::Permutation { wires, table } => {
            let d = dims(wires);
            let mut p = CMat::zeros(d, d);
            for (i, &j) in table.iter().enumerate() {
                p[(j, i)] = C64::new(1.0, 0.0);
            }
            let side = |s: usize| wires.iter().map(|w| copy_name(w, s)).collect::<Vec<_>>();
            let rest = sub(0, parties)?;
            Tree::node(
                op(1, side(1), None, vec![p.clone()], LopTag::Fixed(0)),
                vec![Tree::node(op(2, side(2), None, vec![p], LopTag::Extra), vec![rest])],
            )
        }
        ElementalOp::Phase { wires, angles } => {
            let d = dims(wires);
            let mut m = CMat::zeros(d, d);
            for (j, &a) in angles.iter().enumerate() {
                m[(j, j)] = C64::from_polar(1.0, a);
            }
            let t = wires.iter().map(|w| copy_name(w, 1)).collect();
            Tree::node(op(1, t, None, vec![m], LopTag::Fixed(0)), vec![sub(0, parties)?])
        }
        ElementalOp::Observed { targets, kraus, outputs, ancilla } => {
            let s = match targets.first() {
                None => 1,
                Some(t0) => {
                    let s = *parties
                        .get(t0)
                        .ok_or_else(|| ProtocolError::NotBipartite(format!("register `{t0}` has no party")))?;
                    if targets.iter().any(|t| parties.get(t) != Some(&s)) {
                        return Err(ProtocolError::NotBipartite("observed operation spans both parties".into()));
                    }
                    s
                }
            };
            let mut outs: Vec<(String, usize)> = match outputs {
                Some(o) => o.clone(),
                None => targets.iter().map(|t| (t.clone(), layout.get(t).map(|r| r.dim).unwrap_or(1))).collect(),
            };
            for (n, _) in &outs {
                parties.insert(n.clone(), s);
            }
            match ancilla {
                None => Tree::node(
                    op(s, targets.clone(), outputs.clone(), kraus.clone(), LopTag::Fixed(0)),
                    vec![sub(0, parties)?],
                ),
                Some((a, da)) => {
                    outs.push((copy_name(a, s), *da));
                    let ks = kraus.iter().enumerate().map(|(x, f)| f.kronecker(&basis_ket(*da, x))).collect();
                    let o = 3 - s;
                    let mut kids = Vec::new();
                    for x in 0..kraus.len() {
                        let prep = op(o, vec![], Some(vec![(copy_name(a, o), *da)]), vec![basis_ket(*da, x)], LopTag::Extra);
                        kids.push(Tree::node(prep, vec![sub(x, parties)?]));
                    }
                    Tree::node(op(s, targets.clone(), Some(outs), ks, LopTag::Carries), kids)
                }
            }
        }
        ElementalOp::Forward { source, target } => {
            let s = *parties
                .get(target)
                .filter(|&&p| p == 1 || p == 2)
                .ok_or_else(|| ProtocolError::NotBipartite(format!("forward target `{target}` has no party")))?;
            let o = 3 - s;
            let d = dims(std::slice::from_ref(source));
            let rest = sub(0, parties)?;
            let kids = (0..d)
                .map(|k| {
                    Tree::node(
                        op(s, vec![copy_name(source, s)], Some(vec![(target.clone(), d)]), vec![fourier_fix(d, k)], LopTag::Extra),
                        vec![rest.clone()],
                    )
                })
                .collect();
            Tree::node(
                op(o, vec![copy_name(source, o)], Some(vec![]), (0..d).map(|k| fourier_bra(d, k)).collect(), LopTag::Fixed(0)),
                kids,
            )
        }
    })
}

/// Checks that every operation acts only on registers of its own party.
pub fn check_locality(tree: &LoccTree, layout: &SystemLayout, party_of: &BTreeMap<String, usize>) -> Result<(), ProtocolError> {
    let mut parties = party_of.clone();
    for r in layout.registers() {
        if let Some((w, p)) = r.name.rsplit_once('^') {
            if let Ok(p) = p.parse::<usize>() {
                let _ = w;
                parties.entry(r.name.clone()).or_insert(p);
            }
        }
    }
    fn go(t: &LoccTree, layout: &SystemLayout, parties: &mut BTreeMap<String, usize>) -> Result<(), ProtocolError> {
        let Tree::Node { op, children } = t else { return Ok(()) };
        for n in &op.targets {
            if parties.get(n) != Some(&op.party) {
                return Err(ProtocolError::NotBipartite(format!("party {} touches `{n}`", op.party)));
            }
        }
        for (n, _) in op.outputs.iter().flatten() {
            parties.insert(n.clone(), op.party);
        }
        let (_, out) = op.apply(layout)?;
        for c in children.values() {
            go(c, &out, parties)?;
        }
        Ok(())
    }
    go(tree, layout, &mut parties)
}

/// Per source branch, the Choi distance between the effective maps from the
/// quantum input registers (with the wires fixed to `eta`) of the source
/// protocol followed by wire copying and of the translated protocol applied to
/// the copied input, summed over its extra outcomes.
pub fn translation_distances(
    tree: &ProtocolTree,
    layout: &SystemLayout,
    party_of: &BTreeMap<String, usize>,
    eta: &CMat,
) -> Result<Vec<(Vec<usize>, f64)>, ProtocolError> {
    let (locc, locc_layout) = translate_to_locc(tree, layout, party_of)?;
    let nw = layout.wire_dim();
    let nq = layout.quantum_dim();
    if eta.shape() != (nw, nw) {
        return Err(ProtocolError::Unsupported("wire state has the wrong dimension".into()));
    }
    let (vals, vecs) = herm_eig(eta);
    let to_layout = layout.to_wq().adjoint();
    let embeds: Vec<CMat> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-14)
        .map(|(k, &l)| {
            let v = vecs.column(k).into_owned() * C64::new(l.sqrt(), 0.0);
            &to_layout * v.kronecker(&CMat::identity(nq, nq))
        })
        .collect();
    let v_in = copy_isometry(layout);
    let stacked = stack(&embeds);
    let lop_branches = branch_maps(tree, layout, &stacked)?;
    let locc_branches = branch_maps(&locc, &locc_layout, &(&v_in * &stacked))?;
    let mut groups: BTreeMap<Vec<usize>, Vec<CMat>> = BTreeMap::new();
    for b in &locc_branches {
        let target = doubled_layout(
            &lop_branches
                .iter()
                .find(|x| x.outcomes == b.labels)
                .ok_or_else(|| ProtocolError::Unsupported(format!("LOCC branch {:?} has no source", b.outcomes)))?
                .layout,
        )?;
        let order = target
            .registers()
            .iter()
            .map(|r| b.layout.require(&r.name))
            .collect::<Result<Vec<_>, _>>()?;
        if order.len() != b.layout.len() {
            return Err(ProtocolError::Unsupported("LOCC branch has extra registers".into()));
        }
        let perm = register_permutation(&b.layout.dims(), &order);
        let g = groups.entry(b.labels.clone()).or_default();
        g.extend(split(&(&perm * &b.kraus), nq));
    }
    let mut out = Vec::new();
    for b in &lop_branches {
        let v_out = copy_isometry(&b.layout);
        let lhs = split(&(&v_out * &b.kraus), nq);
        let rhs = groups.remove(&b.outcomes).unwrap_or_default();
        let dout = v_out.nrows();
        let a = crate::qcore::choi_from_kraus(&lhs, nq, dout);
        let c = crate::qcore::choi_from_kraus(&rhs, nq, dout);
        out.push((b.outcomes.clone(), max_dist(&a, &c)));
    }
    if !groups.is_empty() {
        return Err(ProtocolError::Unsupported("unmatched LOCC branches".into()));
    }
    Ok(out)
}

fn stack(blocks: &[CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = CMat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        m.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    m
}

fn split(m: &CMat, width: usize) -> Vec<CMat> {
    (0..m.ncols() / width).map(|k| m.columns(k * width, width).into_owned()).collect()
}
