//! An incoherent qutrit channel outside LOP, with a checkable certificate of
//! the premises of the obstruction argument.
//!
//! The certificate only verifies those premises; it does not decide LOP
//! membership for arbitrary channels.

use rand::Rng;
use serde_json::{json, Value};

use crate::lop::{is_iqo_kraus, Register, SystemLayout, PATTERN_TOL};
use crate::protocol::ProtocolError;
use crate::protocols_std::{iqo_stochastic, stochastic_success};
use crate::qcore::random::random_density;
use crate::qcore::{cr, rank, CMat, QuantumChannel};

/// Completeness tolerance for the certificate.
pub const CPTP_TOL: f64 = 1e-12;
/// Singular value cutoff for the rank-1 premise.
pub const RANK_CUTOFF: f64 = 1e-10;

fn mat(rows: [[f64; 3]; 3]) -> CMat {
    CMat::from_fn(3, 3, |r, c| cr(rows[r][c]))
}

/// The four Kraus operators, exact halves.
pub fn build_counterexample() -> QuantumChannel {
    let k = vec![
        mat([[0.5, -0.5, 0.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]]),
        mat([[0.5, 0.0, -0.5], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]]),
        mat([[0.0, 0.5, -0.5], [0.5, 0.0, 0.0], [0.0, 0.0, 0.0]]),
        mat([[0.5, 0.5, 0.5], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    ];
    QuantumChannel::new(k).expect("equal shapes")
}

/// Projective dephasing on a qutrit, the PIO control.
pub fn pio_control() -> QuantumChannel {
    let k = (0..3).map(|i| CMat::from_fn(3, 3, |r, c| if r == i && c == i { cr(1.0) } else { cr(0.0) })).collect();
    QuantumChannel::new(k).expect("equal shapes")
}

pub fn wire_layout(d: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W1", d), Register::quantum("Q", 1)]).expect("valid")
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub a: usize,
    pub b: usize,
    pub rigid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCertificate {
    pub cptp_ok: bool,
    pub iqo_ok: bool,
    pub k4_rank_one: bool,
    /// Index of the Kraus operator with rank-1 Gram matrix, if any.
    pub rank_one_index: Option<usize>,
    pub pairwise_rigidity: Vec<PairCheck>,
    pub verdict: bool,
}

impl ObstructionCertificate {
    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> =
            self.pairwise_rigidity.iter().map(|p| json!({"a": p.a, "b": p.b, "rigid": p.rigid})).collect();
        json!({
            "cptp_ok": self.cptp_ok,
            "iqo_ok": self.iqo_ok,
            "k4_rank_one": self.k4_rank_one,
            "rank_one_index": self.rank_one_index,
            "pairwise_rigidity": pairs,
            "verdict": self.verdict,
        })
    }
}

fn support(k: &CMat, col: usize) -> Vec<usize> {
    (0..k.nrows()).filter(|&r| k[(r, col)].norm() > PATTERN_TOL).collect()
}

/// A combination `x K_a + y K_b` with `x, y != 0` fails to be incoherent when
/// some column has nonzero entries in different rows of the two operators.
pub fn rigid_pair(ka: &CMat, kb: &CMat) -> bool {
    (0..ka.ncols()).any(|c| {
        let (sa, sb) = (support(ka, c), support(kb, c));
        sa.iter().any(|&x| sb.iter().any(|&y| x != y))
    })
}

pub fn certify_not_lop(ch: &QuantumChannel) -> ObstructionCertificate {
    let d = ch.in_dim();
    let layout = wire_layout(d);
    let cptp_ok = ch.in_dim() == ch.out_dim() && ch.completeness_residual() < CPTP_TOL;
    let iqo_ok = ch.kraus().iter().all(|k| is_iqo_kraus(k, &layout));
    let rank_one_index = ch.kraus().iter().position(|k| rank(&(k.adjoint() * k), RANK_CUTOFF) == 1);
    let n = ch.kraus().len();
    let mut pairwise_rigidity = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairwise_rigidity.push(PairCheck { a, b, rigid: rigid_pair(&ch.kraus()[a], &ch.kraus()[b]) });
        }
    }
    let k4_rank_one = rank_one_index.is_some();
    let verdict = cptp_ok && iqo_ok && k4_rank_one && pairwise_rigidity.iter().all(|p| p.rigid);
    ObstructionCertificate { cptp_ok, iqo_ok, k4_rank_one, rank_one_index, pairwise_rigidity, verdict }
}

/// Success probabilities and worst output deviation of the `1/d` stochastic
/// implementation over `inputs` random states.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCheck {
    pub probabilities: Vec<f64>,
    pub max_state_error: f64,
}

impl RateCheck {
    pub fn mean(&self) -> f64 {
        self.probabilities.iter().sum::<f64>() / self.probabilities.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / self.probabilities.len() as f64
    }
}

pub fn stochastic_rate_check(ch: &QuantumChannel, inputs: usize, rng: &mut impl Rng) -> Result<RateCheck, ProtocolError> {
    let d = ch.in_dim();
    let tree = iqo_stochastic(ch, d, 1)?;
    let mut probabilities = Vec::with_capacity(inputs);
    let mut max_state_error: f64 = 0.0;
    for _ in 0..inputs {
        let rho = random_density(d, rng);
        let out = stochastic_success(&tree, rho.matrix(), d, 1)?;
        probabilities.push(out.success_probability);
        if let Some(s) = out.state {
            let want = ch.apply_raw(rho.matrix());
            max_state_error = max_state_error.max(crate::qcore::max_dist(&s, &want));
        }
    }
    Ok(RateCheck { probabilities, max_state_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lop::classify_channel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entries_are_exact_halves() {
        for k in build_counterexample().kraus() {
            assert!(k.iter().all(|z| z.im == 0.0 && [0.0, 0.5, -0.5].contains(&z.re)));
        }
    }

    #[test]
    fn certificate_holds() {
        let ch = build_counterexample();
        let c = certify_not_lop(&ch);
        assert!(c.verdict, "{c:?}");
        assert_eq!(c.rank_one_index, Some(3));
        let k4 = &ch.kraus()[3];
        assert!(crate::qcore::max_dist(&(k4.adjoint() * k4), &CMat::from_element(3, 3, cr(0.25))) < 1e-15);
        assert!(!classify_channel(&ch, &wire_layout(3)).sio);
        assert!(rigid_pair(&ch.kraus()[0], &ch.kraus()[3]));
    }

    #[test]
    fn control_fails() {
        let c = certify_not_lop(&pio_control());
        assert!(c.cptp_ok && c.iqo_ok && !c.verdict);
    }

    #[test]
    fn rate_is_one_third() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = stochastic_rate_check(&build_counterexample(), 5, &mut rng).unwrap();
        assert!((r.mean() - 1.0 / 3.0).abs() < 1e-9 && r.max_state_error < 1e-9);
    }
}
