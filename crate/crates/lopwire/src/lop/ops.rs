use serde_json::{json, Value};

use super::{LocalPlan, LopError, RegKind, Register, SystemLayout};
use crate::qcore::json::{matrix_from_json, matrix_to_json};
use crate::qcore::{basis_ket, max_dist, CMat, QuantumChannel, C64, TOL};

/// The four elemental operations.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementalOp {
    /// Bijection `table` on the joint index of the listed wires.
    Permutation { wires: Vec<String>, table: Vec<usize> },
    /// Diagonal phases `exp(i angles[j])` on the joint index of the listed wires.
    Phase { wires: Vec<String>, angles: Vec<f64> },
    /// Kraus set on quantum registers. When `outputs` is given the targets are
    /// replaced by fresh quantum registers appended at the end. The outcome is
    /// written as `|alpha>` into a fresh wire appended last; `ancilla` may be
    /// omitted only for a single Kraus operator.
    Observed {
        targets: Vec<String>,
        kraus: Vec<CMat>,
        outputs: Option<Vec<(String, usize)>>,
        ancilla: Option<(String, usize)>,
    },
    /// `sum_j <j|_source (x) |j>_target`: removes the wire, appends the quantum register.
    Forward { source: String, target: String },
}

impl ElementalOp {
    pub fn permutation(wires: &[&str], table: Vec<usize>) -> Self {
        Self::Permutation { wires: names(wires), table }
    }

    pub fn phase(wires: &[&str], angles: Vec<f64>) -> Self {
        Self::Phase { wires: names(wires), angles }
    }

    /// Measurement whose outcome goes to a fresh wire of dimension `kraus.len()`.
    pub fn measure(targets: &[&str], kraus: Vec<CMat>, ancilla: &str) -> Self {
        let d = kraus.len();
        Self::Observed { targets: names(targets), kraus, outputs: None, ancilla: Some((ancilla.into(), d)) }
    }

    /// Single-Kraus local map (an isometry or unitary) on quantum registers.
    pub fn local(targets: &[&str], k: CMat, outputs: Option<Vec<(String, usize)>>) -> Self {
        Self::Observed { targets: names(targets), kraus: vec![k], outputs, ancilla: None }
    }

    /// Fresh wire of dimension `dim` in `|0>`.
    pub fn prepare_wire(name: &str, dim: usize) -> Self {
        Self::Observed {
            targets: vec![],
            kraus: vec![CMat::from_element(1, 1, C64::new(1.0, 0.0))],
            outputs: None,
            ancilla: Some((name.into(), dim)),
        }
    }

    pub fn forward(source: &str, target: &str) -> Self {
        Self::Forward { source: source.into(), target: target.into() }
    }

    pub fn n_outcomes(&self) -> usize {
        match self {
            Self::Observed { kraus, .. } => kraus.len(),
            _ => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Permutation { .. } => "permutation",
            Self::Phase { .. } => "phase",
            Self::Observed { .. } => "observed",
            Self::Forward { .. } => "forward",
        }
    }

    /// Kraus operators (one per outcome, full layout) and the resulting layout.
    pub fn apply(&self, layout: &SystemLayout) -> Result<(Vec<CMat>, SystemLayout), LopError> {
        let a = self.action(layout)?;
        Ok((a.full()?, a.out))
    }

    /// The operation as local matrices plus index bookkeeping.
    pub fn action(&self, layout: &SystemLayout) -> Result<LocalAction, LopError> {
        match self {
            Self::Permutation { wires, table } => {
                let idx = wire_indices(layout, wires)?;
                let d: usize = idx.iter().map(|&k| layout.registers()[k].dim).product();
                check_bijection(table, d)?;
                let mut m = CMat::zeros(d, d);
                for (i, &j) in table.iter().enumerate() {
                    m[(j, i)] = C64::new(1.0, 0.0);
                }
                LocalAction::new(layout, &idx, layout.clone(), &idx, vec![m])
            }
            Self::Phase { wires, angles } => {
                let idx = wire_indices(layout, wires)?;
                let d: usize = idx.iter().map(|&k| layout.registers()[k].dim).product();
                if angles.len() != d || angles.iter().any(|a| !a.is_finite()) {
                    return Err(LopError::Invalid(format!("phase needs {d} finite angles")));
                }
                let mut m = CMat::zeros(d, d);
                for (j, &a) in angles.iter().enumerate() {
                    m[(j, j)] = C64::from_polar(1.0, a);
                }
                LocalAction::new(layout, &idx, layout.clone(), &idx, vec![m])
            }
            Self::Observed { targets, kraus, outputs, ancilla } => {
                observed(layout, targets, kraus, outputs.as_deref(), ancilla.as_ref())
            }
            Self::Forward { source, target } => {
                let s = layout.require(source)?;
                let reg = &layout.registers()[s];
                if reg.kind != RegKind::Wire {
                    return Err(LopError::ForwardQuantum(source.clone()));
                }
                let mut out = layout.without(&[s]);
                out.push(Register::quantum(target.clone(), reg.dim))?;
                let m = CMat::identity(reg.dim, reg.dim);
                let t = out.len() - 1;
                LocalAction::new(layout, &[s], out, &[t], vec![m])
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Permutation { wires, table } => json!({"kind": "permutation", "wires": wires, "table": table}),
            Self::Phase { wires, angles } => json!({"kind": "phase", "wires": wires, "angles": angles}),
            Self::Observed { targets, kraus, outputs, ancilla } => {
                let mut v = json!({
                    "kind": "observed",
                    "targets": targets,
                    "kraus": kraus.iter().map(matrix_to_json).collect::<Vec<_>>(),
                });
                if let Some(o) = outputs {
                    v["outputs"] = o.iter().map(|(n, d)| json!({"name": n, "dim": d})).collect();
                }
                if let Some((n, d)) = ancilla {
                    v["ancilla"] = json!({"name": n, "dim": d});
                }
                v
            }
            Self::Forward { source, target } => json!({"kind": "forward", "source": source, "target": target}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, LopError> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing `kind`"))?;
        match kind {
            "permutation" => Ok(Self::Permutation {
                wires: strings(v, "wires")?,
                table: array(v, "table")?
                    .iter()
                    .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| bad("table entry")))
                    .collect::<Result<_, _>>()?,
            }),
            "phase" => Ok(Self::Phase {
                wires: strings(v, "wires")?,
                angles: array(v, "angles")?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| bad("angle")))
                    .collect::<Result<_, _>>()?,
            }),
            "observed" => {
                let kraus = array(v, "kraus")?
                    .iter()
                    .map(matrix_from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                let outputs = match v.get("outputs") {
                    None | Some(Value::Null) => None,
                    Some(o) => Some(
                        o.as_array()
                            .ok_or_else(|| bad("outputs"))?
                            .iter()
                            .map(name_dim)
                            .collect::<Result<_, _>>()?,
                    ),
                };
                let ancilla = match v.get("ancilla") {
                    None | Some(Value::Null) => None,
                    Some(a) => Some(name_dim(a)?),
                };
                Ok(Self::Observed { targets: strings(v, "targets")?, kraus, outputs, ancilla })
            }
            "forward" => Ok(Self::Forward {
                source: v.get("source").and_then(Value::as_str).ok_or_else(|| bad("source"))?.into(),
                target: v.get("target").and_then(Value::as_str).ok_or_else(|| bad("target"))?.into(),
            }),
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

/// Channel form of one elemental operation on `layout`.
pub fn elemental(op: &ElementalOp, layout: &SystemLayout) -> Result<(QuantumChannel, SystemLayout), LopError> {
    let (kraus, out) = op.apply(layout)?;
    Ok((QuantumChannel::new(kraus)?, out))
}

fn observed(
    layout: &SystemLayout,
    targets: &[String],
    kraus: &[CMat],
    outputs: Option<&[(String, usize)]>,
    ancilla: Option<&(String, usize)>,
) -> Result<LocalAction, LopError> {
    let mut idx = Vec::new();
    for t in targets {
        let k = layout.require(t)?;
        if layout.registers()[k].kind != RegKind::Quantum {
            return Err(LopError::ObservedOnWire(t.clone()));
        }
        if idx.contains(&k) {
            return Err(LopError::DuplicateRegister(t.clone()));
        }
        idx.push(k);
    }
    if kraus.is_empty() {
        return Err(LopError::Invalid("observed operation without Kraus operators".into()));
    }
    let din: usize = idx.iter().map(|&k| layout.registers()[k].dim).product();
    let mut out = layout.clone();
    let mut out_idx = idx.clone();
    if let Some(os) = outputs {
        out = layout.without(&idx);
        out_idx.clear();
        for (n, d) in os {
            out.push(Register::quantum(n.clone(), *d))?;
            out_idx.push(out.len() - 1);
        }
    } else {
        // targets keep their positions; out_idx already points at them
    }
    let dout: usize = out_idx.iter().map(|&k| out.registers()[k].dim).product();
    let mut gram = CMat::zeros(din, din);
    for k in kraus {
        if k.shape() != (dout, din) {
            return Err(LopError::Invalid(format!("Kraus shape {:?}, expected {:?}", k.shape(), (dout, din))));
        }
        gram += k.adjoint() * k;
    }
    let res = max_dist(&gram, &CMat::identity(din, din));
    if res > TOL {
        return Err(LopError::IncompleteObserved(res));
    }
    let da = match ancilla {
        Some((n, d)) => {
            if *d < kraus.len() {
                return Err(LopError::Invalid(format!("ancilla `{n}` too small for {} outcomes", kraus.len())));
            }
            out.push(Register::wire(n.clone(), *d))?;
            out_idx.push(out.len() - 1);
            *d
        }
        None if kraus.len() == 1 => 1,
        None => return Err(LopError::Invalid("several outcomes need an ancilla wire".into())),
    };
    let ms = kraus
        .iter()
        .enumerate()
        .map(|(a, f)| if ancilla.is_some() { f.kronecker(&basis_ket(da, a)) } else { f.clone() })
        .collect();
    LocalAction::new(layout, &idx, out, &out_idx, ms)
}

/// One local matrix per outcome acting on a fixed set of registers.
#[derive(Clone, Debug)]
pub struct LocalAction {
    pub out: SystemLayout,
    pub plan: LocalPlan,
    pub mats: Vec<CMat>,
}

impl LocalAction {
    pub fn new(
        layout: &SystemLayout,
        targets: &[usize],
        out: SystemLayout,
        outputs: &[usize],
        mats: Vec<CMat>,
    ) -> Result<Self, LopError> {
        let plan = LocalPlan::new(layout, targets, &out, outputs)?;
        Ok(Self { out, plan, mats })
    }

    /// Full-layout Kraus operators.
    pub fn full(&self) -> Result<Vec<CMat>, LopError> {
        self.mats.iter().map(|m| self.plan.matrix(m)).collect()
    }

    /// `K_a * v` for every outcome `a`.
    pub fn act(&self, v: &CMat) -> Result<Vec<CMat>, LopError> {
        self.mats.iter().map(|m| self.plan.act(m, v)).collect()
    }
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn wire_indices(layout: &SystemLayout, wires: &[String]) -> Result<Vec<usize>, LopError> {
    let mut idx = Vec::new();
    for w in wires {
        let k = layout.require(w)?;
        if layout.registers()[k].kind != RegKind::Wire {
            return Err(LopError::QuantumPermutation(w.clone()));
        }
        if idx.contains(&k) {
            return Err(LopError::DuplicateRegister(w.clone()));
        }
        idx.push(k);
    }
    Ok(idx)
}

fn check_bijection(table: &[usize], d: usize) -> Result<(), LopError> {
    let mut seen = vec![false; d];
    if table.len() != d {
        return Err(LopError::Invalid(format!("permutation table has {} entries, expected {d}", table.len())));
    }
    for &j in table {
        if j >= d || seen[j] {
            return Err(LopError::Invalid("permutation table is not a bijection".into()));
        }
        seen[j] = true;
    }
    Ok(())
}

fn bad(msg: &str) -> LopError {
    LopError::Invalid(format!("operation JSON: {msg}"))
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>, LopError> {
    v.get(key).and_then(Value::as_array).ok_or_else(|| bad(&format!("`{key}` must be an array")))
}

fn strings(v: &Value, key: &str) -> Result<Vec<String>, LopError> {
    array(v, key)?
        .iter()
        .map(|x| x.as_str().map(String::from).ok_or_else(|| bad(key)))
        .collect()
}

fn name_dim(v: &Value) -> Result<(String, usize), LopError> {
    let n = v.get("name").and_then(Value::as_str).ok_or_else(|| bad("register name"))?;
    let d = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("register dim"))?;
    Ok((n.to_string(), d as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{choi_distance, cr};

    fn proj(d: usize, i: usize) -> CMat {
        let k = basis_ket(d, i);
        &k * k.adjoint()
    }

    #[test]
    fn swap_on_wire() {
        let lay = SystemLayout::new(vec![Register::wire("W", 2)]).unwrap();
        let (ch, _) = elemental(&ElementalOp::permutation(&["W"], vec![1, 0]), &lay).unwrap();
        let x = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        assert_eq!(ch.kraus(), &[x]);
    }

    #[test]
    fn observed_writes_outcome_into_ancilla() {
        let lay = SystemLayout::new(vec![Register::quantum("Q", 2)]).unwrap();
        let op = ElementalOp::measure(&["Q"], vec![proj(2, 0), proj(2, 1)], "A");
        let (ch, out) = elemental(&op, &lay).unwrap();
        assert_eq!(out.registers()[1], Register::wire("A", 2));
        for a in 0..2 {
            assert_eq!(ch.kraus()[a], proj(2, a).kronecker(&basis_ket(2, a)));
        }
    }

    #[test]
    fn forward_moves_register() {
        let lay = SystemLayout::new(vec![Register::wire("W", 3)]).unwrap();
        let (ch, out) = elemental(&ElementalOp::forward("W", "Q"), &lay).unwrap();
        assert_eq!(out.registers(), &[Register::quantum("Q", 3)]);
        assert_eq!(ch.kraus()[0], CMat::identity(3, 3));
    }

    #[test]
    fn rejects_forbidden_ops() {
        let lay = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("Q", 2)]).unwrap();
        assert!(matches!(
            ElementalOp::forward("Q", "T").apply(&lay),
            Err(LopError::ForwardQuantum(_))
        ));
        assert!(matches!(
            ElementalOp::permutation(&["Q"], vec![1, 0]).apply(&lay),
            Err(LopError::QuantumPermutation(_))
        ));
        assert!(matches!(
            ElementalOp::measure(&["Q"], vec![proj(2, 0)], "A").apply(&lay),
            Err(LopError::IncompleteObserved(_))
        ));
    }

    #[test]
    fn forward_then_measure_equals_wire_measurement() {
        let lay = SystemLayout::new(vec![Register::wire("W", 3)]).unwrap();
        let (fwd, mid) = elemental(&ElementalOp::forward("W", "Q"), &lay).unwrap();
        let meas = ElementalOp::Observed {
            targets: vec!["Q".into()],
            kraus: (0..3).map(|i| basis_ket(3, i).adjoint()).collect(),
            outputs: Some(vec![]),
            ancilla: Some(("A".into(), 3)),
        };
        let (m, _) = elemental(&meas, &mid).unwrap();
        let direct = QuantumChannel::new((0..3).map(|i| proj(3, i)).collect()).unwrap();
        assert!(choi_distance(&fwd.then(&m).unwrap(), &direct) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let op = ElementalOp::Observed {
            targets: vec!["Q".into()],
            kraus: vec![proj(2, 0), proj(2, 1)],
            outputs: Some(vec![("R".into(), 2)]),
            ancilla: Some(("A".into(), 2)),
        };
        assert_eq!(ElementalOp::from_json(&op.to_json()).unwrap(), op);
        let p = ElementalOp::phase(&["W"], vec![0.1, -0.3]);
        assert_eq!(ElementalOp::from_json(&p.to_json()).unwrap(), p);
    }
}
