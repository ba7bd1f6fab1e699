use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::ProtocolError;
use crate::lop::{ElementalOp, LocalAction, LopError, SystemLayout};
use crate::qcore::{herm_eig, CMat, DensityMatrix, QuantumChannel, C64};

/// Branches below this probability are dropped from `all_branches` reports.
pub const PRUNE_TOL: f64 = 1e-14;

/// An operation that can sit at a tree node.
pub trait TreeOp: Clone {
    fn n_outcomes(&self) -> usize;
    fn action(&self, layout: &SystemLayout) -> Result<LocalAction, ProtocolError>;
    /// One full-layout Kraus operator per outcome, plus the new layout.
    fn apply(&self, layout: &SystemLayout) -> Result<(Vec<CMat>, SystemLayout), ProtocolError> {
        let a = self.action(layout)?;
        Ok((a.full()?, a.out))
    }
    /// What this outcome contributes to the path label (`None` = nothing).
    fn path_label(&self, outcome: usize) -> Option<usize> {
        Some(outcome)
    }
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, ProtocolError>;
}

impl TreeOp for ElementalOp {
    fn n_outcomes(&self) -> usize {
        ElementalOp::n_outcomes(self)
    }

    fn action(&self, layout: &SystemLayout) -> Result<LocalAction, ProtocolError> {
        Ok(ElementalOp::action(self, layout)?)
    }

    fn to_json(&self) -> Value {
        ElementalOp::to_json(self)
    }

    fn from_json(v: &Value) -> Result<Self, ProtocolError> {
        Ok(ElementalOp::from_json(v)?)
    }
}

/// Branching protocol: each node applies one operation and continues with the
/// subtree keyed by the observed outcome.
#[derive(Clone, Debug, PartialEq)]
pub enum Tree<Op> {
    Leaf,
    Node { op: Op, children: BTreeMap<usize, Tree<Op>> },
}

pub type ProtocolTree = Tree<ElementalOp>;

impl<Op: TreeOp> Tree<Op> {
    pub fn leaf() -> Self {
        Tree::Leaf
    }

    /// Node whose outcome `a` continues with `children[a]`.
    pub fn node(op: Op, children: Vec<Tree<Op>>) -> Self {
        Tree::Node { op, children: children.into_iter().enumerate().collect() }
    }

    /// Node with every outcome ending in a leaf.
    pub fn single(op: Op) -> Self {
        let n = op.n_outcomes();
        Self::node(op, vec![Tree::Leaf; n])
    }

    /// Operations in sequence, every outcome of each continuing with the next.
    pub fn chain(ops: impl IntoIterator<Item = Op>) -> Self {
        let ops: Vec<Op> = ops.into_iter().collect();
        ops.into_iter().rev().fold(Tree::Leaf, |rest, op| {
            let n = op.n_outcomes();
            Self::node(op, vec![rest; n])
        })
    }

    /// Replaces every leaf by `next`.
    pub fn then(self, next: Tree<Op>) -> Self {
        self.then_with(&mut |_| next.clone())
    }

    /// Replaces each leaf by `f(outcome path of that leaf)`.
    pub fn then_with(self, f: &mut impl FnMut(&[usize]) -> Tree<Op>) -> Self {
        fn go<Op>(t: Tree<Op>, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> Tree<Op>) -> Tree<Op> {
            match t {
                Tree::Leaf => f(path),
                Tree::Node { op, children } => {
                    let children = children
                        .into_iter()
                        .map(|(a, c)| {
                            path.push(a);
                            let c = go(c, path, f);
                            path.pop();
                            (a, c)
                        })
                        .collect();
                    Tree::Node { op, children }
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node { children, .. } => 1 + children.values().map(Tree::depth).max().unwrap_or(0),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node { children, .. } => children.values().map(Tree::n_leaves).sum(),
        }
    }

    /// Every operation in the tree, depth first.
    pub fn ops(&self) -> Vec<&Op> {
        let mut out = Vec::new();
        fn go<'a, Op>(t: &'a Tree<Op>, out: &mut Vec<&'a Op>) {
            if let Tree::Node { op, children } = t {
                out.push(op);
                for c in children.values() {
                    go(c, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn to_json(&self) -> Value {
        match self {
            Tree::Leaf => json!({}),
            Tree::Node { op, children } => {
                let ch: Map<String, Value> = children.iter().map(|(a, c)| (a.to_string(), c.to_json())).collect();
                json!({"op": op.to_json(), "children": ch})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, ProtocolError> {
        let obj = v.as_object().ok_or_else(|| malformed("tree node must be an object"))?;
        if obj.is_empty() {
            return Ok(Tree::Leaf);
        }
        let op = Op::from_json(obj.get("op").ok_or_else(|| malformed("node without `op`"))?)?;
        let mut children = BTreeMap::new();
        if let Some(c) = obj.get("children") {
            for (k, sub) in c.as_object().ok_or_else(|| malformed("`children` must be an object"))? {
                let a: usize = k.parse().map_err(|_| malformed("child keys must be integers"))?;
                children.insert(a, Tree::from_json(sub)?);
            }
        }
        Ok(Tree::Node { op, children })
    }
}

fn malformed(msg: &str) -> ProtocolError {
    ProtocolError::Lop(LopError::Invalid(format!("protocol JSON: {msg}")))
}

fn child<'a, Op>(
    children: &'a BTreeMap<usize, Tree<Op>>,
    n: usize,
    path: &[usize],
    a: usize,
) -> Result<&'a Tree<Op>, ProtocolError> {
    if let Some(&extra) = children.keys().find(|&&k| k >= n) {
        return Err(ProtocolError::ExtraBranch { path: path.to_vec(), outcome: extra });
    }
    children.get(&a).ok_or_else(|| ProtocolError::MissingBranch { path: path.to_vec(), outcome: a })
}

fn check_dim(rho: &CMat, layout: &SystemLayout) -> Result<(), ProtocolError> {
    if rho.nrows() != layout.total_dim() || rho.ncols() != layout.total_dim() {
        return Err(ProtocolError::Lop(LopError::Invalid(format!(
            "state dimension {} does not match layout dimension {}",
            rho.nrows(),
            layout.total_dim()
        ))));
    }
    Ok(())
}

/// `V` with `V V^dag = rho`, from the non-negative part of the spectrum.
fn factor(rho: &CMat) -> CMat {
    let (vals, vecs) = herm_eig(rho);
    let keep: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > 0.0).collect();
    let mut v = CMat::zeros(rho.nrows(), keep.len().max(1));
    for (c, &j) in keep.iter().enumerate() {
        let s = vals[j].sqrt();
        for i in 0..rho.nrows() {
            v[(i, c)] = vecs[(i, j)] * s;
        }
    }
    v
}

fn gram_of(v: &CMat) -> CMat {
    v * v.adjoint()
}

fn weight(v: &CMat) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Every root-to-leaf path as `(outcomes, labels, K_path * v, layout)`.
fn walk<Op: TreeOp>(
    tree: &Tree<Op>,
    v: CMat,
    layout: &SystemLayout,
    prune: Option<f64>,
    visit: &mut dyn FnMut(&[usize], &[usize], CMat, SystemLayout) -> Result<(), ProtocolError>,
    pruned: &mut dyn FnMut(&[usize], f64),
) -> Result<(), ProtocolError> {
    fn go<Op: TreeOp>(
        t: &Tree<Op>,
        v: CMat,
        layout: SystemLayout,
        path: &mut Vec<usize>,
        labels: &mut Vec<usize>,
        prune: Option<f64>,
        visit: &mut dyn FnMut(&[usize], &[usize], CMat, SystemLayout) -> Result<(), ProtocolError>,
        pruned: &mut dyn FnMut(&[usize], f64),
    ) -> Result<(), ProtocolError> {
        if let Some(tol) = prune {
            let p = weight(&v);
            if p < tol {
                pruned(path, p);
                return Ok(());
            }
        }
        match t {
            Tree::Leaf => visit(path, labels, v, layout),
            Tree::Node { op, children } => {
                let act = op.action(&layout)?;
                let n = act.mats.len();
                for (a, w) in act.act(&v)?.into_iter().enumerate() {
                    let c = child(children, n, path, a)?;
                    path.push(a);
                    let lab = op.path_label(a);
                    if let Some(x) = lab {
                        labels.push(x);
                    }
                    go(c, w, act.out.clone(), path, labels, prune, visit, pruned)?;
                    if lab.is_some() {
                        labels.pop();
                    }
                    path.pop();
                }
                Ok(())
            }
        }
    }
    go(tree, v, layout.clone(), &mut Vec::new(), &mut Vec::new(), prune, visit, pruned)
}

/// Sum over all leaves of the unnormalized branch states.
pub fn execute_average<Op: TreeOp>(
    tree: &Tree<Op>,
    rho: &CMat,
    layout: &SystemLayout,
) -> Result<(CMat, SystemLayout), ProtocolError> {
    check_dim(rho, layout)?;
    let mut acc: Option<(CMat, SystemLayout)> = None;
    walk(
        tree,
        factor(rho),
        layout,
        None,
        &mut |path, _, v, l| {
            match &mut acc {
                None => acc = Some((gram_of(&v), l)),
                Some((m, l0)) => {
                    if *l0 != l {
                        return Err(ProtocolError::LayoutDrift { path: path.to_vec() });
                    }
                    *m += gram_of(&v);
                }
            }
            Ok(())
        },
        &mut |_, _| {},
    )?;
    Ok(acc.expect("a tree has at least one leaf"))
}

/// One root-to-leaf path.
#[derive(Clone, Debug)]
pub struct OutcomePath {
    pub outcomes: Vec<usize>,
    pub probability: f64,
    pub state: DensityMatrix,
    pub layout: SystemLayout,
}

#[derive(Clone, Debug)]
pub struct BranchReport {
    pub paths: Vec<OutcomePath>,
    /// Paths dropped for probability below `PRUNE_TOL`, with that probability.
    pub pruned: Vec<(Vec<usize>, f64)>,
}

impl BranchReport {
    pub fn total_probability(&self) -> f64 {
        self.paths.iter().map(|p| p.probability).sum::<f64>() + self.pruned.iter().map(|p| p.1).sum::<f64>()
    }
}

pub fn execute_branches<Op: TreeOp>(
    tree: &Tree<Op>,
    rho: &CMat,
    layout: &SystemLayout,
) -> Result<BranchReport, ProtocolError> {
    check_dim(rho, layout)?;
    let mut paths = Vec::new();
    let mut pruned = Vec::new();
    walk(
        tree,
        factor(rho),
        layout,
        Some(PRUNE_TOL),
        &mut |path, _, v, l| {
            let p = weight(&v);
            let state = DensityMatrix::from_unchecked(gram_of(&v) / C64::new(p, 0.0));
            paths.push(OutcomePath { outcomes: path.to_vec(), probability: p, state, layout: l });
            Ok(())
        },
        &mut |path, p| pruned.push((path.to_vec(), p)),
    )?;
    Ok(BranchReport { paths, pruned })
}

/// Follows one path, drawing each outcome from its Born probability.
pub fn execute_sampled<Op: TreeOp>(
    tree: &Tree<Op>,
    rho: &CMat,
    layout: &SystemLayout,
    seed: u64,
) -> Result<OutcomePath, ProtocolError> {
    check_dim(rho, layout)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = tree;
    let mut v = factor(rho);
    let mut layout = layout.clone();
    let mut path = Vec::new();
    let mut prob = 1.0;
    while let Tree::Node { op, children } = t {
        let act = op.action(&layout)?;
        let branches = act.act(&v)?;
        let ps: Vec<f64> = branches.iter().map(weight).collect();
        let tot: f64 = ps.iter().sum();
        let mut u = rng.random::<f64>() * tot;
        let mut a = ps.len() - 1;
        for (k, &p) in ps.iter().enumerate() {
            if u < p {
                a = k;
                break;
            }
            u -= p;
        }
        let c = child(children, branches.len(), &path, a)?;
        prob *= ps[a] / tot;
        v = &branches[a] / C64::new(ps[a].sqrt(), 0.0);
        layout = act.out;
        path.push(a);
        t = c;
    }
    Ok(OutcomePath { outcomes: path, probability: prob, state: DensityMatrix::from_unchecked(gram_of(&v)), layout })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Average,
    AllBranches,
    Sampled(u64),
}

#[derive(Clone, Debug)]
pub enum Execution {
    Average { state: DensityMatrix, layout: SystemLayout },
    Branches(BranchReport),
    Sampled(OutcomePath),
}

pub fn execute<Op: TreeOp>(
    tree: &Tree<Op>,
    rho: &DensityMatrix,
    layout: &SystemLayout,
    mode: Mode,
) -> Result<Execution, ProtocolError> {
    let r = rho.matrix();
    Ok(match mode {
        Mode::Average => {
            let (m, l) = execute_average(tree, r, layout)?;
            Execution::Average { state: DensityMatrix::from_unchecked(m), layout: l }
        }
        Mode::AllBranches => Execution::Branches(execute_branches(tree, r, layout)?),
        Mode::Sampled(seed) => Execution::Sampled(execute_sampled(tree, r, layout, seed)?),
    })
}

/// Product of the Kraus operators along one root-to-leaf path.
#[derive(Clone, Debug)]
pub struct BranchOperator {
    pub outcomes: Vec<usize>,
    /// Outcomes filtered through `TreeOp::path_label`.
    pub labels: Vec<usize>,
    pub kraus: CMat,
    pub layout: SystemLayout,
}

pub fn branch_operators<Op: TreeOp>(
    tree: &Tree<Op>,
    layout: &SystemLayout,
) -> Result<Vec<BranchOperator>, ProtocolError> {
    let d = layout.total_dim();
    branch_maps(tree, layout, &CMat::identity(d, d))
}

/// Like `branch_operators`, with every path operator multiplied by `embed` on the right.
pub fn branch_maps<Op: TreeOp>(
    tree: &Tree<Op>,
    layout: &SystemLayout,
    embed: &CMat,
) -> Result<Vec<BranchOperator>, ProtocolError> {
    let mut out = Vec::new();
    walk(
        tree,
        embed.clone(),
        layout,
        None,
        &mut |path, labels, k, l| {
            out.push(BranchOperator { outcomes: path.to_vec(), labels: labels.to_vec(), kraus: k, layout: l });
            Ok(())
        },
        &mut |_, _| {},
    )?;
    Ok(out)
}

/// Flattened channel: one Kraus operator per leaf, no pruning.
pub fn to_channel<Op: TreeOp>(
    tree: &Tree<Op>,
    layout: &SystemLayout,
) -> Result<(QuantumChannel, SystemLayout), ProtocolError> {
    let branches = branch_operators(tree, layout)?;
    let out = branches[0].layout.clone();
    if let Some(b) = branches.iter().find(|b| b.layout != out) {
        return Err(ProtocolError::LayoutDrift { path: b.outcomes.clone() });
    }
    let ch = QuantumChannel::new(branches.into_iter().map(|b| b.kraus).collect())?;
    Ok((ch, out))
}
