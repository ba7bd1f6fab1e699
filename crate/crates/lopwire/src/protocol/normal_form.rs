//! Canonical decomposition of a protocol into steps
//! `K = sum_i |sigma(min(r-1, i))><i|_W (x) E(i)` with strictly decreasing cut `r`.
//!
//! `W` is the joint index of all wire registers and `Q` the joint index of all
//! quantum registers, each in layout order.

use super::{ProtocolError, ProtocolTree, Tree, TreeOp};
use crate::lop::{wire_block, wire_pattern, wq_kraus, SystemLayout};
use crate::qcore::{max_abs, max_dist, CMat, QuantumChannel, TOL};

/// Default cap on any relabeled wire dimension.
pub const MAX_WIRE_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct NfOutcome {
    /// `sigma`: one distinct output label per kept level `0..cut`.
    pub injection: Vec<usize>,
    pub out_wire: usize,
    pub out_q: usize,
    /// `E(i)` for every input level `i`, each `out_q x in_q`.
    pub ops: Vec<CMat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormStep {
    pub in_wire: usize,
    pub in_q: usize,
    /// Levels `cut-1..in_wire` are merged into one.
    pub cut: usize,
    pub outcomes: Vec<NfOutcome>,
}

impl NormalFormStep {
    pub fn level(&self, i: usize) -> usize {
        i.min(self.cut - 1)
    }

    pub fn kraus(&self, a: usize) -> CMat {
        let o = &self.outcomes[a];
        let mut k = CMat::zeros(o.out_wire * o.out_q, self.in_wire * self.in_q);
        for i in 0..self.in_wire {
            let j = o.injection[self.level(i)];
            k.view_mut((j * o.out_q, i * self.in_q), (o.out_q, self.in_q)).copy_from(&o.ops[i]);
        }
        k
    }

    /// `max |sum_a K_a^dag K_a - I|`, computed block by block.
    pub fn completeness_residual(&self) -> f64 {
        let q = self.in_q;
        let mut worst: f64 = 0.0;
        for i in 0..self.in_wire {
            for i2 in i..self.in_wire {
                if self.level(i) != self.level(i2) {
                    continue;
                }
                let mut s = CMat::zeros(q, q);
                for o in &self.outcomes {
                    s += o.ops[i].adjoint() * &o.ops[i2];
                }
                let want = if i == i2 { CMat::identity(q, q) } else { CMat::zeros(q, q) };
                worst = worst.max(max_dist(&s, &want));
            }
        }
        worst
    }
}

/// A step and, per outcome, the step that follows (`None` ends the branch).
#[derive(Clone, Debug, PartialEq)]
pub struct NfNode {
    pub step: NormalFormStep,
    pub children: Vec<Option<NfNode>>,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub root: NfNode,
    pub in_layout: SystemLayout,
    pub out_layout: SystemLayout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NfVerdict {
    pub ok: bool,
    /// Longest branch, in steps.
    pub max_len: usize,
    /// Input wire dimension, the bound on `max_len`.
    pub wire_dim: usize,
    pub failures: Vec<String>,
}

/// Checks step shapes, per-step completeness, strictly decreasing cuts, matching
/// dimensions between consecutive steps, an uncut first step, and the length bound.
pub fn verify_normal_form(root: &NfNode) -> NfVerdict {
    let mut failures = Vec::new();
    if root.step.cut != root.step.in_wire {
        failures.push(format!("first step is cut at {} of {}", root.step.cut, root.step.in_wire));
    }
    let mut max_len = 0;
    fn go(n: &NfNode, path: &mut Vec<usize>, fails: &mut Vec<String>, max_len: &mut usize) {
        let s = &n.step;
        *max_len = (*max_len).max(path.len() + 1);
        if s.cut == 0 || s.cut > s.in_wire {
            fails.push(format!("{path:?}: cut {} outside 1..={}", s.cut, s.in_wire));
            return;
        }
        if n.children.len() != s.outcomes.len() {
            fails.push(format!("{path:?}: {} children for {} outcomes", n.children.len(), s.outcomes.len()));
            return;
        }
        for (a, o) in s.outcomes.iter().enumerate() {
            if o.injection.len() != s.cut {
                fails.push(format!("{path:?}/{a}: injection length {} != cut {}", o.injection.len(), s.cut));
                return;
            }
            let mut seen = o.injection.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != o.injection.len() || o.injection.iter().any(|&j| j >= o.out_wire) {
                fails.push(format!("{path:?}/{a}: injection {:?} not injective into {}", o.injection, o.out_wire));
            }
            if o.ops.len() != s.in_wire || o.ops.iter().any(|e| e.shape() != (o.out_q, s.in_q)) {
                fails.push(format!("{path:?}/{a}: controlled operators have wrong shape"));
                return;
            }
        }
        let res = s.completeness_residual();
        if res > TOL {
            fails.push(format!("{path:?}: completeness residual {res:e}"));
        }
        for (a, c) in n.children.iter().enumerate() {
            if let Some(c) = c {
                let o = &s.outcomes[a];
                if c.step.in_wire != o.out_wire || c.step.in_q != o.out_q {
                    fails.push(format!("{path:?}/{a}: next step dimensions do not match"));
                }
                if c.step.cut >= s.cut {
                    fails.push(format!("{path:?}/{a}: cut does not decrease ({} -> {})", s.cut, c.step.cut));
                }
                path.push(a);
                go(c, path, fails, max_len);
                path.pop();
            }
        }
    }
    go(root, &mut Vec::new(), &mut failures, &mut max_len);
    if max_len > root.step.in_wire {
        failures.push(format!("length {max_len} exceeds wire dimension {}", root.step.in_wire));
    }
    NfVerdict { ok: failures.is_empty(), max_len, wire_dim: root.step.in_wire, failures }
}

impl NormalForm {
    pub fn verify(&self) -> NfVerdict {
        verify_normal_form(&self.root)
    }

    /// Number of steps on every branch.
    pub fn branch_lengths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn go(n: &NfNode, d: usize, out: &mut Vec<usize>) {
            for c in &n.children {
                match c {
                    Some(c) => go(c, d + 1, out),
                    None => out.push(d + 1),
                }
            }
        }
        go(&self.root, 0, &mut out);
        out
    }

    /// Products along every branch, in layout order; vanishing branches are skipped.
    pub fn to_channel(&self) -> Result<QuantumChannel, ProtocolError> {
        let mut ks = Vec::new();
        fn go(n: &NfNode, k: &CMat, ks: &mut Vec<CMat>) {
            for (a, c) in n.children.iter().enumerate() {
                let m = n.step.kraus(a) * k;
                match c {
                    Some(c) => go(c, &m, ks),
                    None => {
                        if max_abs(&m) > 1e-12 {
                            ks.push(m);
                        }
                    }
                }
            }
        }
        let d = self.in_layout.total_dim();
        go(&self.root, &CMat::identity(d, d), &mut ks);
        let (pin, pout) = (self.in_layout.to_wq(), self.out_layout.to_wq().adjoint());
        let mut out = Vec::with_capacity(ks.len());
        for k in ks {
            if k.nrows() != pout.ncols() {
                return Err(ProtocolError::Unsupported(format!(
                    "branch ends with dimension {} instead of {}",
                    k.nrows(),
                    pout.ncols()
                )));
            }
            out.push(&pout * k * &pin);
        }
        if out.is_empty() {
            let (din, dout) = (self.in_layout.total_dim(), self.out_layout.total_dim());
            out.push(CMat::zeros(dout, din));
        }
        Ok(QuantumChannel::new(out)?)
    }
}

pub fn compile_normal_form(tree: &ProtocolTree, layout: &SystemLayout) -> Result<NormalForm, ProtocolError> {
    compile_with_cap(tree, layout, MAX_WIRE_DIM)
}

pub fn compile_with_cap(
    tree: &ProtocolTree,
    layout: &SystemLayout,
    cap: usize,
) -> Result<NormalForm, ProtocolError> {
    let (_, out_layout) = super::to_channel(tree, layout)?;
    let n = layout.wire_dim();
    let q = layout.quantum_dim();
    if n > cap {
        return Err(ProtocolError::WireOverflow(n));
    }
    let mut root = match raw(tree, layout, cap)? {
        Some(r) => r,
        None => identity_step(n, q, None),
    };
    normalize(&mut root);
    if root.step.cut != root.step.in_wire {
        root = identity_step(n, q, Some(root));
    }
    Ok(NormalForm { root, in_layout: layout.clone(), out_layout })
}

fn identity_step(n: usize, q: usize, child: Option<NfNode>) -> NfNode {
    NfNode {
        step: NormalFormStep {
            in_wire: n,
            in_q: q,
            cut: n,
            outcomes: vec![NfOutcome {
                injection: (0..n).collect(),
                out_wire: n,
                out_q: q,
                ops: vec![CMat::identity(q, q); n],
            }],
        },
        children: vec![child],
    }
}

fn raw(tree: &ProtocolTree, layout: &SystemLayout, cap: usize) -> Result<Option<NfNode>, ProtocolError> {
    let Tree::Node { op, children } = tree else {
        return Ok(None);
    };
    let (ks, out) = TreeOp::apply(op, layout)?;
    let mut subs = Vec::with_capacity(ks.len());
    for a in 0..ks.len() {
        let c = children
            .get(&a)
            .ok_or_else(|| ProtocolError::MissingBranch { path: vec![], outcome: a })?;
        subs.push(raw(c, &out, cap)?);
    }
    op_steps(&ks, layout, &out, subs, cap).map(Some)
}

/// Steps realizing one elemental operation: a single uncut step when every wire
/// map is injective, otherwise (forwarding) a reordering step followed by one
/// collapsing step per fiber with two or more levels.
fn op_steps(
    ks: &[CMat],
    in_l: &SystemLayout,
    out_l: &SystemLayout,
    children: Vec<Option<NfNode>>,
    cap: usize,
) -> Result<NfNode, ProtocolError> {
    let (n, qi) = (in_l.wire_dim(), in_l.quantum_dim());
    let (no, qo) = (out_l.wire_dim(), out_l.quantum_dim());
    if no > cap {
        return Err(ProtocolError::WireOverflow(no));
    }
    let kw: Vec<CMat> = ks.iter().map(|k| wq_kraus(k, in_l, out_l)).collect();
    let mut maps = Vec::new();
    for k in &kw {
        let pat = wire_pattern(k, qo, qi);
        if pat.iter().any(|rows| rows.len() > 1) {
            return Err(ProtocolError::Unsupported("operation is not incoherent on the wires".into()));
        }
        maps.push(pat.into_iter().map(|r| r.first().copied()).collect::<Vec<_>>());
    }
    let injective = |f: &Vec<Option<usize>>| {
        let mut v: Vec<usize> = f.iter().flatten().copied().collect();
        let len = v.len();
        v.sort_unstable();
        v.dedup();
        v.len() == len
    };
    if maps.iter().all(injective) {
        let mut outcomes = Vec::new();
        for (k, f) in kw.iter().zip(&maps) {
            let mut free = (0..no).filter(|j| !f.contains(&Some(*j)));
            let mut inj = Vec::with_capacity(n);
            for v in f {
                inj.push(match v {
                    Some(j) => *j,
                    None => free
                        .next()
                        .ok_or_else(|| ProtocolError::Unsupported("cannot complete wire map".into()))?,
                });
            }
            let ops = (0..n).map(|i| wire_block(k, inj[i], i, qo, qi)).collect();
            outcomes.push(NfOutcome { injection: inj, out_wire: no, out_q: qo, ops });
        }
        return Ok(NfNode { step: NormalFormStep { in_wire: n, in_q: qi, cut: n, outcomes }, children });
    }
    if kw.len() != 1 {
        return Err(ProtocolError::Unsupported("collapsing wire map with several outcomes".into()));
    }
    let f: Vec<usize> = maps[0]
        .iter()
        .map(|v| v.ok_or_else(|| ProtocolError::Unsupported("vanishing wire column".into())))
        .collect::<Result<_, _>>()?;
    let es: Vec<CMat> = (0..n).map(|i| wire_block(&kw[0], f[i], i, qo, qi)).collect();
    let child = children.into_iter().next().flatten();
    collapse_chain(&f, &es, n, no, qi, qo, child)
}

#[derive(Clone, Copy)]
enum Content {
    Orig(usize),
    Group(usize),
}

fn collapse_chain(
    f: &[usize],
    es: &[CMat],
    n: usize,
    no: usize,
    qi: usize,
    qo: usize,
    child: Option<NfNode>,
) -> Result<NfNode, ProtocolError> {
    for e in es {
        if max_dist(&(e.adjoint() * e), &CMat::identity(qi, qi)) > TOL {
            return Err(ProtocolError::Unsupported("collapsing operation with non-isometric blocks".into()));
        }
    }
    let fibers: Vec<Vec<usize>> = (0..no).map(|j| (0..n).filter(|&i| f[i] == j).collect()).collect();
    let groups: Vec<&Vec<usize>> = fibers.iter().filter(|g| g.len() >= 2).collect();
    let singles: Vec<usize> = fibers.iter().filter(|g| g.len() == 1).map(|g| g[0]).collect();
    let mut pos = vec![0; n];
    for (p, &i) in singles.iter().enumerate() {
        pos[i] = p;
    }
    let mut top = n;
    for g in &groups {
        top -= g.len();
        for (k, &i) in g.iter().enumerate() {
            pos[i] = top + k;
        }
    }
    let first = NormalFormStep {
        in_wire: n,
        in_q: qi,
        cut: n,
        outcomes: vec![NfOutcome { injection: pos.clone(), out_wire: n, out_q: qo, ops: es.to_vec() }],
    };
    let mut content = vec![Content::Orig(0); n];
    for i in 0..n {
        content[pos[i]] = Content::Orig(i);
    }
    let value = |c: Content| match c {
        Content::Orig(i) => f[i],
        Content::Group(j) => f[groups[j][0]],
    };
    let id = CMat::identity(qo, qo);
    let mut steps = Vec::new();
    let mut w = n;
    for (j, g) in groups.iter().enumerate() {
        let r = w - g.len() + 1;
        let last = j + 1 == groups.len();
        let (injection, out_wire): (Vec<usize>, usize) = if last {
            let mut inj: Vec<usize> = (0..r - 1).map(|t| value(content[t])).collect();
            inj.push(f[g[0]]);
            (inj, no)
        } else {
            let mut inj: Vec<usize> = (0..r - 1).map(|t| t + 1).collect();
            inj.push(0);
            (inj, r)
        };
        let proj = |p: usize| match content[p] {
            Content::Orig(i) => &es[i] * es[i].adjoint(),
            Content::Group(_) => unreachable!("collapsed levels sit below the cut"),
        };
        let ok_ops: Vec<CMat> = (0..w).map(|p| if p + 1 >= r { proj(p) } else { id.clone() }).collect();
        let mut outcomes = vec![NfOutcome { injection: injection.clone(), out_wire, out_q: qo, ops: ok_ops }];
        for p in r - 1..w {
            let mut ops = vec![CMat::zeros(qo, qo); w];
            ops[p] = &id - proj(p);
            outcomes.push(NfOutcome { injection: injection.clone(), out_wire, out_q: qo, ops });
        }
        steps.push(NormalFormStep { in_wire: w, in_q: qo, cut: r, outcomes });
        let mut next = vec![Content::Group(j)];
        next.extend_from_slice(&content[..r - 1]);
        content = next;
        w = r;
    }
    let mut tail = child;
    for s in steps.into_iter().rev() {
        let mut children = vec![None; s.outcomes.len()];
        children[0] = tail;
        tail = Some(NfNode { step: s, children });
    }
    Ok(NfNode { step: first, children: vec![tail] })
}

fn normalize(node: &mut NfNode) {
    let mut a = 0;
    while a < node.step.outcomes.len() {
        let Some(child) = node.children[a].take() else {
            a += 1;
            continue;
        };
        let ra = node.step.cut;
        let rb = child.step.cut;
        let s = node.step.outcomes[a].injection.clone();
        let mut classes: Vec<usize> = s.iter().map(|&x| x.min(rb - 1)).collect();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() == ra {
            let oa = node.step.outcomes[a].clone();
            let mut outs = Vec::with_capacity(child.step.outcomes.len());
            for ob in &child.step.outcomes {
                let injection = (0..ra).map(|k| ob.injection[s[k].min(rb - 1)]).collect();
                let ops = (0..node.step.in_wire)
                    .map(|i| &ob.ops[s[i.min(ra - 1)]] * &oa.ops[i])
                    .collect();
                outs.push(NfOutcome { injection, out_wire: ob.out_wire, out_q: ob.out_q, ops });
            }
            node.step.outcomes.splice(a..a + 1, outs);
            node.children.splice(a..a + 1, child.children);
        } else {
            let top = rb - 1;
            let mut singles: Vec<usize> = s.iter().copied().filter(|&x| x < top).collect();
            let mut tops: Vec<usize> = s.iter().copied().filter(|&x| x >= top).collect();
            singles.sort_unstable();
            tops.sort_unstable();
            let l = singles.len() + 1;
            let eta_inv: Vec<usize> = singles.iter().chain(&tops).copied().collect();
            let eta = |x: usize| eta_inv.iter().position(|&y| y == x).expect("label in support");
            let oa = &mut node.step.outcomes[a];
            oa.injection = s.iter().map(|&x| eta(x)).collect();
            oa.out_wire = ra;
            let outcomes = child
                .step
                .outcomes
                .iter()
                .map(|ob| NfOutcome {
                    injection: (0..l).map(|k| if k + 1 < l { ob.injection[eta_inv[k]] } else { ob.injection[top] }).collect(),
                    out_wire: ob.out_wire,
                    out_q: ob.out_q,
                    ops: (0..ra).map(|k| ob.ops[eta_inv[k]].clone()).collect(),
                })
                .collect();
            let b = NfNode {
                step: NormalFormStep { in_wire: ra, in_q: child.step.in_q, cut: l, outcomes },
                children: child.children,
            };
            node.children[a] = Some(b);
            a += 1;
        }
    }
    for c in node.children.iter_mut().flatten() {
        normalize(c);
    }
}
