use std::path::PathBuf;
use std::process::{Command, Output};

use lopwire::protocols_std::{b_layout, bijection_b};
use lopwire::qcore::json::state_to_json;
use lopwire::qcore::PureState;
use serde_json::{json, Value};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lopwire")).args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lopwire-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn counterexample_verdict_and_exit() {
    let o = bin(&["counterexample"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["kraus"].as_array().unwrap().len(), 4);
}

#[test]
fn prepare_ghz_on_a_chain() {
    let o = bin(&["prepare", "--target", "ghz", "--n", "3", "--topology", "chain"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["state"]["dim"], 8);
}

#[test]
fn prepare_rejects_unsupported_size() {
    assert_eq!(bin(&["prepare", "--target", "w", "--n", "4", "--topology", "chain"]).status.code(), Some(2));
    assert_eq!(bin(&["prepare", "--target", "ghz", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn distill_csv_is_reproducible() {
    let args = ["distill", "--trials", "300", "--steps", "200", "--seed", "4"];
    let a = bin(&args);
    let b = bin(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,mean_p_half,std_p_half,survivors"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn distill_rejects_bad_probability() {
    assert_eq!(bin(&["distill", "--p0", "2"]).status.code(), Some(2));
}

#[test]
fn verify_suites_pass_and_report() {
    for suite in ["bijection", "phase-loop", "teleport", "iqo", "normal-form", "translate-locc", "free-state-preservation"] {
        let o = bin(&["verify", "--suite", suite, "--seed", "7", "--cases", "6"]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let v = stdout_json(&o);
        assert_eq!(v["pass"], true);
        assert!(!v["anchor"].as_str().unwrap().is_empty());
        assert_eq!(v["seed"], 7);
    }
}

#[test]
fn verify_with_impossible_tolerance_fails_the_check() {
    let o = bin(&["verify", "--suite", "teleport", "--cases", "2", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["pass"], false);
}

#[test]
fn verify_rejects_nonpositive_tolerance() {
    assert_eq!(bin(&["verify", "--suite", "teleport", "--tol", "0"]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let args = ["verify", "--suite", "normal-form", "--seed", "3", "--cases", "5"];
    assert_eq!(bin(&args).stdout, bin(&args).stdout);
}

#[test]
fn malformed_json_reports_position() {
    let p = tmp("bad.json");
    std::fs::write(&p, "{\n  \"rows\": 2,\n  \"cols\": oops\n}").unwrap();
    let ps = p.to_str().unwrap();
    let o = bin(&["monotone", "--state", ps, "--layout", ps]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3 column"), "{err}");
}

#[test]
fn run_executes_a_protocol_file() {
    let proto = tmp("proto.json");
    let state = tmp("state.json");
    let tree = bijection_b("W", "Q", 2);
    std::fs::write(&proto, json!({"layout": b_layout(2).to_json(), "tree": tree.to_json()}).to_string()).unwrap();
    let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
    std::fs::write(&state, state_to_json(&psi.density()).to_string()).unwrap();
    let o = bin(&["run", "--protocol", proto.to_str().unwrap(), "--state", state.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["mode"], "branches");
    assert!((v["total_probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let sampled = bin(&["run", "--protocol", proto.to_str().unwrap(), "--state", state.to_str().unwrap(), "--mode", "sampled"]);
    assert_eq!(stdout_json(&sampled)["path"]["outcomes"], json!([0, 0, 0]));
}

#[test]
fn monotone_on_a_plus_wire() {
    let st = tmp("plus.json");
    let lay = tmp("layout.json");
    std::fs::write(&st, state_to_json(&PureState::maximally_coherent(2).density()).to_string()).unwrap();
    std::fs::write(&lay, b_layout(2).to_json().to_string()).unwrap();
    let o = bin(&["monotone", "--state", st.to_str().unwrap(), "--layout", lay.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!((stdout_json(&o)["rel_ent_coherence"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
