//! Coherence pumping on a qubit wire and its Monte Carlo.
//!
//! States are symmetric qubit wire states `[[1/2, p/2], [p/2, 1/2]]`, tracked
//! by the parameter `p`; the off-diagonal entry is `p/2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lop::{cq_report, ElementalOp, Register, SystemLayout};
use crate::protocol::{execute_average, execute_branches, reduce_named, ProtocolError, Tree};
use crate::qcore::random::haar_unitary;
use crate::qcore::{c, cr, max_dist, CMat};

#[derive(Debug, Error)]
pub enum DistillError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("state is incoherent on the wires")]
    Incoherent,
    #[error("no coherent 2x2 block found after {0} attempts")]
    SearchFailed(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// One measurement outcome of a pumping step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub prob: f64,
    pub p: f64,
}

/// Closed-form update: `+` with probability `(1+pq)/2` to `(p+q)/(1+pq)`,
/// `-` with probability `(1-pq)/2` to `(p-q)/(1-pq)`. The `-` outcome is
/// omitted when its probability vanishes.
pub fn step_update(p: f64, q: f64) -> Vec<StepOutcome> {
    let pq = p * q;
    let mut out = vec![StepOutcome { prob: (1.0 + pq) / 2.0, p: (p + q) / (1.0 + pq) }];
    if 1.0 - pq > 0.0 {
        out.push(StepOutcome { prob: (1.0 - pq) / 2.0, p: (p - q) / (1.0 - pq) });
    }
    out
}

pub fn symmetric_state(p: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[cr(0.5), cr(p / 2.0), cr(p / 2.0), cr(0.5)])
}

fn pump_layout() -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W1", 2), Register::wire("W2", 2)]).expect("valid")
}

/// CNOT from `W1` onto `W2`, `W1` forwarded and measured in the `+/-` basis,
/// then a `Z` on `W2` after `-`.
fn pump_tree() -> Tree<ElementalOp> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CMat::from_row_slice(1, 2, &[cr(h), cr(h)]);
    let minus = CMat::from_row_slice(1, 2, &[cr(h), cr(-h)]);
    let meas = ElementalOp::Observed {
        targets: vec!["A".into()],
        kraus: vec![plus, minus],
        outputs: Some(vec![]),
        ancilla: Some(("S".into(), 2)),
    };
    Tree::chain([ElementalOp::permutation(&["W1", "W2"], vec![0, 1, 3, 2]), ElementalOp::forward("W1", "A")]).then(
        Tree::node(
            meas,
            vec![Tree::Leaf, Tree::single(ElementalOp::phase(&["W2"], vec![0.0, std::f64::consts::PI]))],
        ),
    )
}

/// The same step run as an elemental protocol on the two wire states; the
/// returned `p` is twice the real off-diagonal of the post-measurement state.
pub fn step_oracle(p: f64, q: f64) -> Result<Vec<(StepOutcome, CMat)>, DistillError> {
    let rho = symmetric_state(p).kronecker(&symmetric_state(q));
    let rep = execute_branches(&pump_tree(), &rho, &pump_layout())?;
    let mut out = Vec::new();
    for b in rep.paths {
        let s = reduce_named(b.state.matrix(), &b.layout, &["W2"])?;
        out.push((StepOutcome { prob: b.probability, p: 2.0 * s[(0, 1)].re }, s));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillParams {
    pub p0: f64,
    pub q: f64,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    pub drop_negative: bool,
}

impl DistillParams {
    /// Both states start with off-diagonal `0.01`.
    pub fn standard() -> Self {
        Self { p0: 0.02, q: 0.02, trials: 10_000, steps: 5_000, seed: 1, drop_negative: true }
    }

    pub fn validate(&self) -> Result<(), DistillError> {
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(DistillError::Params(format!("p0 = {} outside [0, 1]", self.p0)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(DistillError::Params(format!("q = {} outside [0, 1]", self.q)));
        }
        if self.trials == 0 {
            return Err(DistillError::Params("trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub mean_p_half: f64,
    pub std_p_half: f64,
    /// Fraction of trials not dropped.
    pub survivors: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistillTrace {
    pub records: Vec<StepRecord>,
}

impl DistillTrace {
    pub fn final_mean(&self) -> f64 {
        self.records.last().map(|r| r.mean_p_half).unwrap_or(f64::NAN)
    }
}

/// Trials per parallel chunk; chunk sums are combined in a fixed order so
/// the trace does not depend on the thread count.
const CHUNK: usize = 64;

#[derive(Clone)]
struct Moments {
    n: Vec<usize>,
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self { n: vec![0; len], sum: vec![0.0; len], sq: vec![0.0; len] }
    }

    fn add(&mut self, s: usize, x: f64) {
        self.n[s] += 1;
        self.sum[s] += x;
        self.sq[s] += x * x;
    }

    fn merge(mut self, o: &Moments) -> Self {
        for s in 0..self.n.len() {
            self.n[s] += o.n[s];
            self.sum[s] += o.sum[s];
            self.sq[s] += o.sq[s];
        }
        self
    }
}

fn run_trial(params: &DistillParams, trial: usize, m: &mut Moments) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(trial as u64);
    let mut p = params.p0;
    m.add(0, p / 2.0);
    for s in 1..=params.steps {
        let u: f64 = rng.random();
        let pq = p * params.q;
        p = if u < (1.0 + pq) / 2.0 { (p + params.q) / (1.0 + pq) } else { (p - params.q) / (1.0 - pq) };
        if params.drop_negative && p < 0.0 {
            return;
        }
        m.add(s, p / 2.0);
    }
}

/// Monte Carlo of repeated pumping, one ChaCha stream per trial. Step 0 is the
/// initial state. Dropped trials leave the mean and deviation.
pub fn run_chain(params: &DistillParams) -> Result<DistillTrace, DistillError> {
    params.validate()?;
    let len = params.steps + 1;
    let chunks: Vec<Moments> = (0..params.trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::new(len);
            for t in c * CHUNK..((c + 1) * CHUNK).min(params.trials) {
                run_trial(params, t, &mut m);
            }
            m
        })
        .collect();
    let tot = chunks.iter().fold(Moments::new(len), |a, m| a.merge(m));
    let records = (0..len)
        .map(|s| {
            let n = tot.n[s];
            let (mean, var) = if n > 0 {
                let mean = tot.sum[s] / n as f64;
                (mean, (tot.sq[s] / n as f64 - mean * mean).max(0.0))
            } else {
                (f64::NAN, f64::NAN)
            };
            StepRecord { step: s, mean_p_half: mean, std_p_half: var.sqrt(), survivors: n as f64 / params.trials as f64 }
        })
        .collect();
    Ok(DistillTrace { records })
}

impl DistillTrace {
    /// Mean of `mean_p_half` over the last `window` steps.
    pub fn plateau(&self, window: usize) -> f64 {
        let k = window.min(self.records.len()).max(1);
        let tail = &self.records[self.records.len() - k..];
        tail.iter().map(|r| r.mean_p_half).sum::<f64>() / k as f64
    }

    /// Means of consecutive non-overlapping blocks of `window` steps.
    pub fn smoothed(&self, window: usize) -> Vec<f64> {
        self.records.chunks(window.max(1)).map(|c| c.iter().map(|r| r.mean_p_half).sum::<f64>() / c.len() as f64).collect()
    }
}

/// A symmetric qubit wire state obtained from a non-CQ state by free operations.
#[derive(Clone, Debug)]
pub struct Extracted {
    pub state: CMat,
    pub probability: f64,
    /// The quantum-side projection used (identity when none was needed).
    pub measurement: CMat,
    /// The two wire levels carrying the coherence.
    pub levels: (usize, usize),
    pub attempts: usize,
}

/// Attempts per search.
pub const SEARCH_CAP: usize = 1000;

/// Works on a layout with one wire `W` (dim `d`) and any quantum registers.
/// Picks the pair of wire levels with the largest coherence block, projects
/// the quantum side on a rank-1 operator (first the block's dominant direction,
/// then Haar-random ones) until the conditional wire block is coherent,
/// restricts the wire to the two levels, removes the phase and symmetrizes
/// the diagonal by mixing with the swapped state.
pub fn extract_qubit_block(rho: &CMat, layout: &SystemLayout, seed: u64) -> Result<Extracted, DistillError> {
    let wires = layout.indices_of(crate::lop::RegKind::Wire);
    if wires.len() != 1 {
        return Err(DistillError::Params("extraction needs exactly one wire".into()));
    }
    if cq_report(rho, layout, false).is_cq {
        return Err(DistillError::Incoherent);
    }
    let dims = layout.dims();
    let w = wires[0];
    let d = dims[w];
    let to = layout.to_wq();
    let r = &to * rho * to.adjoint();
    let dq = r.nrows() / d;
    let block = |i: usize, j: usize| r.view((i * dq, j * dq), (dq, dq)).into_owned();
    let mut best = (0, 1, -1.0);
    for i in 0..d {
        for j in i + 1..d {
            let n = block(i, j).iter().map(|z| z.norm()).sum::<f64>();
            if n > best.2 {
                best = (i, j, n);
            }
        }
    }
    let (i, j, _) = best;
    let off = block(i, j);
    let svd = off.clone().svd(true, true);
    let u0 = svd.u.as_ref().expect("requested").column(0).into_owned();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=SEARCH_CAP {
        let v = if attempt == 0 { u0.clone() } else { haar_unitary(dq, &mut rng).column(0).into_owned() };
        let m = &v * v.adjoint();
        let e = |a: usize, b: usize| (v.adjoint() * block(a, b) * &v)[(0, 0)];
        let (a, b, x) = (e(i, i).re, e(j, j).re, e(i, j));
        if x.norm() <= crate::lop::PATTERN_TOL || a + b <= 0.0 {
            continue;
        }
        let state = symmetric_state(2.0 * x.norm() / (a + b));
        return Ok(Extracted { state, probability: a + b, measurement: m, levels: (i, j), attempts: attempt });
    }
    Err(DistillError::SearchFailed(SEARCH_CAP))
}

/// Runs the whole extraction as a protocol on a qubit-wire, qubit-quantum
/// layout `[W, Q]` and returns the resulting wire state; used to check that
/// `extract_qubit_block` only reports states that free operations reach.
pub fn extraction_oracle(rho: &CMat, ex: &Extracted) -> Result<CMat, DistillError> {
    let layout = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("Q", ex.measurement.nrows())])
        .map_err(ProtocolError::from)?;
    let h = ex.measurement.clone();
    let dq = h.nrows();
    let rest = CMat::identity(dq, dq) - &h;
    let meas = ElementalOp::Observed {
        targets: vec!["Q".into()],
        kraus: vec![h, rest],
        outputs: None,
        ancilla: Some(("M".into(), 2)),
    };
    let first = Tree::node(meas, vec![Tree::Leaf, Tree::Leaf]);
    let rep = execute_branches(&first, rho, &layout)?;
    let good = rep.paths.iter().find(|p| p.outcomes == [0]).ok_or(DistillError::SearchFailed(0))?;
    let w = reduce_named(good.state.matrix(), &good.layout, &["W"])?;
    let phase = w[(0, 1)].arg();
    let fix = ElementalOp::phase(&["W"], vec![0.0, phase]);
    let wl = SystemLayout::new(vec![Register::wire("W", 2)]).map_err(ProtocolError::from)?;
    let (fixed, _) = execute_average(&Tree::single(fix), &w, &wl)?;
    let swapped = {
        let x = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        &x * &fixed * &x
    };
    Ok((fixed + swapped) * c(0.5, 0.0))
}

/// Largest deviation between `step_update` and `step_oracle` on an `n x n` grid of `[0, 1)^2`.
pub fn grid_agreement(n: usize) -> Result<f64, DistillError> {
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let (p, q) = (a as f64 / n as f64, b as f64 / n as f64);
            let cf = step_update(p, q);
            let or = step_oracle(p, q)?;
            for (x, (y, s)) in cf.iter().zip(&or) {
                worst = worst.max((x.prob - y.prob).abs()).max((x.p - y.p).abs());
                worst = worst.max(max_dist(s, &symmetric_state(x.p)));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_protocol() {
        assert!(grid_agreement(12).unwrap() < 1e-12);
    }

    #[test]
    fn saturated_input_is_absorbing() {
        for q in [0.0, 0.3, 0.9] {
            assert!(step_update(1.0, q).iter().all(|o| (o.p - 1.0).abs() < 1e-15));
        }
        let out = step_update(1.0, 1.0);
        assert_eq!(out.len(), 1);
        assert!((out[0].prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_is_reproducible() {
        let p = DistillParams { trials: 50, steps: 40, ..DistillParams::standard() };
        assert_eq!(run_chain(&p).unwrap(), run_chain(&p).unwrap());
    }

    #[test]
    fn extraction_from_maximally_correlated() {
        let l = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("Q", 2)]).unwrap();
        let mut v = CMat::zeros(4, 1);
        v[(0, 0)] = cr(0.8);
        v[(3, 0)] = cr(0.6);
        let rho = &v * v.adjoint();
        let ex = extract_qubit_block(&rho, &l, 0).unwrap();
        let want = extraction_oracle(&rho, &ex).unwrap();
        assert!(max_dist(&ex.state, &want) < 1e-10);
    }
}
