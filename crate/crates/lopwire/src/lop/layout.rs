use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::LopError;
use crate::qcore::{CMat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegKind {
    Wire,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    pub kind: RegKind,
}

impl Register {
    pub fn wire(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim, kind: RegKind::Wire }
    }

    pub fn quantum(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim, kind: RegKind::Quantum }
    }
}

/// Ordered registers; tensor indices compose row-major in this order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    regs: Vec<Register>,
}

impl SystemLayout {
    pub fn new(regs: Vec<Register>) -> Result<Self, LopError> {
        let mut l = Self::default();
        for r in regs {
            l.push(r)?;
        }
        Ok(l)
    }

    pub fn push(&mut self, r: Register) -> Result<(), LopError> {
        if r.dim == 0 {
            return Err(LopError::ZeroDim(r.name));
        }
        if self.index_of(&r.name).is_some() {
            return Err(LopError::DuplicateRegister(r.name));
        }
        self.regs.push(r);
        Ok(())
    }

    pub fn from_json(v: &Value) -> Result<Self, LopError> {
        let regs: Vec<Register> = serde_json::from_value(v.clone())
            .map_err(|e| LopError::Invalid(format!("layout: {e}")))?;
        Self::new(regs)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.regs).expect("registers serialize")
    }

    pub fn registers(&self) -> &[Register] {
        &self.regs
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.regs.iter().map(|r| r.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.regs.iter().map(|r| r.dim).product()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.regs.iter().position(|r| r.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, LopError> {
        self.index_of(name).ok_or_else(|| LopError::UnknownRegister(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&Register> {
        self.regs.iter().find(|r| r.name == name)
    }

    pub fn indices_of(&self, kind: RegKind) -> Vec<usize> {
        (0..self.regs.len()).filter(|&k| self.regs[k].kind == kind).collect()
    }

    pub fn wire_mask(&self) -> Vec<bool> {
        self.regs.iter().map(|r| r.kind == RegKind::Wire).collect()
    }

    /// Joint dimension of all wire registers (1 when there are none).
    pub fn wire_dim(&self) -> usize {
        self.regs.iter().filter(|r| r.kind == RegKind::Wire).map(|r| r.dim).product()
    }

    pub fn quantum_dim(&self) -> usize {
        self.regs.iter().filter(|r| r.kind == RegKind::Quantum).map(|r| r.dim).product()
    }

    pub fn without(&self, drop: &[usize]) -> Self {
        let regs = self
            .regs
            .iter()
            .enumerate()
            .filter(|(k, _)| !drop.contains(k))
            .map(|(_, r)| r.clone())
            .collect();
        Self { regs }
    }

    /// Wire registers first, then quantum registers, each group in layout order.
    pub fn wq_order(&self) -> Vec<usize> {
        let mut o = self.indices_of(RegKind::Wire);
        o.extend(self.indices_of(RegKind::Quantum));
        o
    }

    /// Unitary taking layout order to wire-then-quantum order.
    pub fn to_wq(&self) -> CMat {
        register_permutation(&self.dims(), &self.wq_order())
    }
}

/// Permutation matrix whose output factor `a` is input factor `order[a]`.
pub fn register_permutation(dims: &[usize], order: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let mut u = CMat::zeros(total, total);
    let mut digits = vec![0usize; dims.len()];
    for x in 0..total {
        let mut rest = x;
        for k in (0..dims.len()).rev() {
            digits[k] = rest % dims[k];
            rest /= dims[k];
        }
        let mut y = 0;
        for &k in order {
            y = y * dims[k] + digits[k];
        }
        u[(y, x)] = C64::new(1.0, 0.0);
    }
    u
}

/// Index bookkeeping for a local map from the `targets` of one layout to the
/// `outputs` of another, with every other register passing through by name.
#[derive(Clone, Debug)]
pub struct LocalPlan {
    t_of: Vec<usize>,
    base_of: Vec<usize>,
    o_off: Vec<usize>,
    t_dim: usize,
    out_total: usize,
}

impl LocalPlan {
    pub fn new(in_l: &SystemLayout, targets: &[usize], out_l: &SystemLayout, outputs: &[usize]) -> Result<Self, LopError> {
        let in_dims = in_l.dims();
        let out_dims = out_l.dims();
        let t_dim: usize = targets.iter().map(|&k| in_dims[k]).product();
        let o_dim: usize = outputs.iter().map(|&k| out_dims[k]).product();
        let mut pass = Vec::new();
        for k in 0..in_l.len() {
            if targets.contains(&k) {
                continue;
            }
            let r = &in_l.regs[k];
            let j = out_l.require(&r.name)?;
            if outputs.contains(&j) || out_dims[j] != r.dim {
                return Err(LopError::Invalid(format!("register `{}` cannot pass through", r.name)));
            }
            pass.push((k, j));
        }
        if pass.len() + outputs.len() != out_l.len() {
            return Err(LopError::Invalid("output layout has unaccounted registers".into()));
        }
        let mut out_stride = vec![1usize; out_dims.len()];
        for k in (0..out_dims.len().saturating_sub(1)).rev() {
            out_stride[k] = out_stride[k + 1] * out_dims[k + 1];
        }
        let o_off = (0..o_dim)
            .map(|mut o| {
                let mut off = 0;
                for &k in outputs.iter().rev() {
                    off += (o % out_dims[k]) * out_stride[k];
                    o /= out_dims[k];
                }
                off
            })
            .collect();
        let in_total = in_l.total_dim();
        let mut t_of = Vec::with_capacity(in_total);
        let mut base_of = Vec::with_capacity(in_total);
        let mut digits = vec![0usize; in_dims.len()];
        for x in 0..in_total {
            let mut rest = x;
            for k in (0..in_dims.len()).rev() {
                digits[k] = rest % in_dims[k];
                rest /= in_dims[k];
            }
            let mut t = 0;
            for &k in targets {
                t = t * in_dims[k] + digits[k];
            }
            t_of.push(t);
            base_of.push(pass.iter().map(|&(k, j)| digits[k] * out_stride[j]).sum());
        }
        Ok(Self { t_of, base_of, o_off, t_dim, out_total: out_l.total_dim() })
    }

    fn check(&self, m: &CMat) -> Result<(), LopError> {
        if m.shape() != (self.o_off.len(), self.t_dim) {
            return Err(LopError::Invalid(format!(
                "local matrix is {:?}, expected {:?}",
                m.shape(),
                (self.o_off.len(), self.t_dim)
            )));
        }
        Ok(())
    }

    /// The full-layout matrix of `m`.
    pub fn matrix(&self, m: &CMat) -> Result<CMat, LopError> {
        self.check(m)?;
        let mut res = CMat::zeros(self.out_total, self.t_of.len());
        for x in 0..self.t_of.len() {
            let (t, base) = (self.t_of[x], self.base_of[x]);
            for (o, &off) in self.o_off.iter().enumerate() {
                let z = m[(o, t)];
                if z != C64::new(0.0, 0.0) {
                    res[(base + off, x)] = z;
                }
            }
        }
        Ok(res)
    }

    /// `matrix(m) * v` without forming the full matrix.
    pub fn act(&self, m: &CMat, v: &CMat) -> Result<CMat, LopError> {
        self.check(m)?;
        if v.nrows() != self.t_of.len() {
            return Err(LopError::Invalid(format!("operand has {} rows, expected {}", v.nrows(), self.t_of.len())));
        }
        let mut res = CMat::zeros(self.out_total, v.ncols());
        for c in 0..v.ncols() {
            for x in 0..self.t_of.len() {
                let a = v[(x, c)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let (t, base) = (self.t_of[x], self.base_of[x]);
                for (o, &off) in self.o_off.iter().enumerate() {
                    let z = m[(o, t)];
                    if z != C64::new(0.0, 0.0) {
                        res[(base + off, c)] += z * a;
                    }
                }
            }
        }
        Ok(res)
    }
}

/// Full-layout Kraus matrix of the local map `m` from the `targets` of `in_l`
/// to the `outputs` of `out_l`. Every other input register passes through to
/// the output register with the same name.
pub fn local_operator(
    in_l: &SystemLayout,
    targets: &[usize],
    out_l: &SystemLayout,
    outputs: &[usize],
    m: &CMat,
) -> Result<CMat, LopError> {
    LocalPlan::new(in_l, targets, out_l, outputs)?.matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{basis_ket, max_dist};

    fn l(regs: Vec<Register>) -> SystemLayout {
        SystemLayout::new(regs).unwrap()
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(SystemLayout::new(vec![Register::wire("A", 2), Register::quantum("A", 2)]).is_err());
    }

    #[test]
    fn local_operator_on_second_factor() {
        let lay = l(vec![Register::wire("W", 2), Register::quantum("Q", 3)]);
        let x = CMat::from_fn(3, 3, |r, c| C64::new((r * 3 + c) as f64, 0.0));
        let full = local_operator(&lay, &[1], &lay, &[1], &x).unwrap();
        assert!(max_dist(&full, &CMat::identity(2, 2).kronecker(&x)) < 1e-15);
    }

    #[test]
    fn moving_register_to_end() {
        let a = l(vec![Register::wire("W", 2), Register::quantum("Q", 3)]);
        let b = l(vec![Register::quantum("Q", 3), Register::quantum("T", 2)]);
        let m = CMat::identity(2, 2);
        let full = local_operator(&a, &[0], &b, &[1], &m).unwrap();
        let want = register_permutation(&[2, 3], &[1, 0]);
        assert!(max_dist(&full, &want) < 1e-15);
    }

    #[test]
    fn appended_output() {
        let a = l(vec![Register::quantum("Q", 2)]);
        let b = l(vec![Register::quantum("Q", 2), Register::wire("A", 3)]);
        let k = basis_ket(3, 2);
        let full = local_operator(&a, &[], &b, &[1], &k).unwrap();
        assert!(max_dist(&full, &CMat::identity(2, 2).kronecker(&k)) < 1e-15);
    }

    #[test]
    fn layout_json_round_trip() {
        let lay = l(vec![Register::wire("W1", 3), Register::quantum("Q", 2)]);
        assert_eq!(SystemLayout::from_json(&lay.to_json()).unwrap(), lay);
    }
}
