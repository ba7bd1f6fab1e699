//! Named check suites. Each draws its random cases from one seeded ChaCha stream.

use std::collections::BTreeMap;

use clap::ValueEnum;
use lopwire::lop::random::{random_cq_state, random_iqo_channel};
use lopwire::lop::{cq_report, Register, SystemLayout};
use lopwire::protocol::random::random_tree;
use lopwire::protocol::*;
use lopwire::protocols_std::*;
use lopwire::qcore::random::{haar_pure, random_channel, random_density};
use lopwire::qcore::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    Bijection,
    PhaseLoop,
    Teleport,
    Iqo,
    NormalForm,
    TranslateLocc,
    FreeStatePreservation,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Bijection => "bijection",
            Suite::PhaseLoop => "phase-loop",
            Suite::Teleport => "teleport",
            Suite::Iqo => "iqo",
            Suite::NormalForm => "normal-form",
            Suite::TranslateLocc => "translate-locc",
            Suite::FreeStatePreservation => "free-state-preservation",
        }
    }

    /// The result each suite checks.
    fn anchor(self) -> &'static str {
        match self {
            Suite::Bijection => "wire coherence <-> maximally correlated entanglement bijection B and its inverse",
            Suite::PhaseLoop => "probabilistic wire phase gate, success 1-(1-1/d)^M",
            Suite::Teleport => "any channel from a maximally coherent wire ancilla",
            Suite::Iqo => "IQO channels: exact on qubit wires, rate 1/d stochastic otherwise",
            Suite::NormalForm => "step normal form of elemental protocol trees",
            Suite::TranslateLocc => "LOP with maximally correlated ancillas as two-party LOCC",
            Suite::FreeStatePreservation => "elemental operations keep CQ states CQ",
        }
    }

    fn tolerance(self) -> f64 {
        match self {
            Suite::PhaseLoop => 1e-12,
            _ => 1e-9,
        }
    }
}

pub struct Report {
    pub suite: &'static str,
    pub anchor: &'static str,
    pub seed: u64,
    pub cases: usize,
    pub tolerance: f64,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub pass: bool,
    pub extra: Value,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "anchor": self.anchor,
            "seed": self.seed,
            "cases": self.cases,
            "tolerance": self.tolerance,
            "errors": self.errors,
            "max_error": self.max_error,
            "pass": self.pass,
            "extra": self.extra,
        })
    }
}

fn wq(dw: usize, dq: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W", dw), Register::quantum("Q", dq)]).expect("valid")
}

fn e(x: impl std::fmt::Display) -> CliError {
    CliError::Input(x.to_string())
}

pub fn run_suite(suite: Suite, seed: u64, cases: usize, tol: Option<f64>) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = json!({});
    let mut errors = Vec::with_capacity(cases);
    match suite {
        Suite::Bijection => {
            for k in 0..cases {
                let d = 2 + k % 3;
                let tree = bijection_b("W", "Q", d).then(bijection_b_inv("W", "Q", "F", d));
                let rho = random_density(d, &mut rng);
                let (out, l) = execute_average(&tree, rho.matrix(), &b_layout(d)).map_err(e)?;
                errors.push(max_dist(&reduce_named(&out, &l, &["W"]).map_err(e)?, rho.matrix()));
            }
        }
        Suite::PhaseLoop => {
            for k in 0..cases {
                let d = 2 + k % 3;
                let m = 1 + (k / 3) % 4;
                let phases: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                let lp = phase_via_loop(&phases, d, m);
                let psi = haar_pure(d, &mut rng);
                let maps = branch_maps(&lp.tree, &b_layout(d), &psi.ket()).map_err(e)?;
                let p: f64 = maps
                    .iter()
                    .filter(|b| phase_loop_success(&lp.tree, &b.outcomes))
                    .map(|b| b.kraus.norm_squared())
                    .sum();
                errors.push((p - (1.0 - (1.0 - 1.0 / d as f64).powi(m as i32))).abs());
            }
        }
        Suite::Teleport => {
            for k in 0..cases {
                let (d, dq) = [(2, 2), (2, 3), (3, 2), (3, 3)][k % 4];
                let ch = random_channel(d * dq, d * dq, 2, &mut rng);
                let spec = ChannelSpec::new(ch.clone(), d, dq).map_err(e)?;
                let got = teleported_channel(&spec, &PureState::maximally_coherent(d)).map_err(e)?;
                errors.push(choi_distance(&got, &ch));
            }
        }
        Suite::Iqo => {
            let id = CMat::identity(4, 4);
            for _ in 0..cases {
                let ch = random_iqo_channel(2, 2, 3, &mut rng);
                let tree = iqo_qubit_exact(&ch, 2).map_err(e)?;
                let got = effective_channel(&tree, &iqo_layout(2, 2), &id, &["W1", "Q"]).map_err(e)?;
                errors.push(choi_distance(&got, &ch));
            }
            let ch = random_iqo_channel(3, 2, 3, &mut rng);
            let tree = iqo_stochastic(&ch, 3, 2).map_err(e)?;
            let mut rates = Vec::new();
            for _ in 0..cases {
                let rho = random_density(6, &mut rng);
                let p = stochastic_success(&tree, rho.matrix(), 3, 2).map_err(e)?.success_probability;
                errors.push((p - 1.0 / 3.0).abs());
                rates.push(p);
            }
            extra = json!({"stochastic_rates": rates});
        }
        Suite::NormalForm => {
            let mut lens = Vec::new();
            for _ in 0..cases {
                let l = wq(rng.random_range(2..=4), 2);
                let tree = random_tree(&l, rng.random_range(1..=5), 64, &mut rng);
                let (ch, _) = to_channel(&tree, &l).map_err(e)?;
                let nf = compile_normal_form(&tree, &l).map_err(e)?;
                let v = nf.verify();
                lens.push(v.max_len);
                let d = choi_distance(&ch, &nf.to_channel().map_err(e)?);
                errors.push(if v.ok { d } else { f64::INFINITY });
            }
            extra = json!({"branch_lengths": lens});
        }
        Suite::TranslateLocc => {
            let l = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("A", 2), Register::quantum("B", 2)])
                .expect("valid");
            let mut parties = BTreeMap::new();
            parties.insert("A".to_string(), 1);
            parties.insert("B".to_string(), 2);
            for k in 0..10 {
                parties.insert(format!("X{k}"), 1 + (k % 2));
            }
            for _ in 0..cases {
                let tree = random_tree(&l, rng.random_range(1..=3), 32, &mut rng);
                let eta = random_density(2, &mut rng);
                let ds = translation_distances(&tree, &l, &parties, eta.matrix()).map_err(e)?;
                errors.push(ds.iter().map(|x| x.1).fold(0.0, f64::max));
            }
        }
        Suite::FreeStatePreservation => {
            for _ in 0..cases {
                let l = wq(rng.random_range(2..=3), 2);
                let rho = random_cq_state(&l, &mut rng);
                let tree = random_tree(&l, rng.random_range(1..=3), 48, &mut rng);
                let rep = execute_branches(&tree, &rho, &l).map_err(e)?;
                let worst =
                    rep.paths.iter().map(|b| cq_report(b.state.matrix(), &b.layout, false).wire_violation).fold(0.0, f64::max);
                errors.push(worst);
            }
        }
    }
    let tolerance = tol.unwrap_or(suite.tolerance());
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(Report {
        suite: suite.name(),
        anchor: suite.anchor(),
        seed,
        cases,
        tolerance,
        pass: errors.iter().all(|x| *x < tolerance),
        errors,
        max_error,
        extra,
    })
}
