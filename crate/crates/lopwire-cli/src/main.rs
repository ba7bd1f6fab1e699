//! `lopwire`: run protocols, prepare states, compute monotones, simulate
//! distillation and run the check suites.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input.

mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lopwire::cxample::{build_counterexample, certify_not_lop};
use lopwire::distill::{run_chain, DistillParams};
use lopwire::lop::SystemLayout;
use lopwire::monotones::monotone_report;
use lopwire::protocol::{execute, Execution, Mode, OutcomePath, ProtocolTree};
use lopwire::protocols_std::{prepare_ghz, prepare_w, Topology};
use lopwire::qcore::json::{matrix_to_json, state_from_json, state_to_json, to_canonical_string};
use lopwire::qcore::DensityMatrix;
use serde_json::{json, Value};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "lopwire", version, about = "Local operations with physical wires")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunMode {
    Average,
    Branches,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Ghz,
    W,
}

#[derive(Clone, Copy, ValueEnum)]
enum Wiring {
    SingleWire,
    Chain,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a protocol file (`{"layout": [...], "tree": {...}}`) on a state file.
    Run {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value = "branches")]
        mode: RunMode,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prepare a GHZ or W state over `n` parties.
    Prepare {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "single-wire")]
        topology: Wiring,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coherence and entanglement quantities of a state on a layout.
    Monotone {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo of coherence pumping; CSV `step,mean_p_half,std_p_half,survivors`.
    Distill {
        #[arg(long, default_value_t = 0.02)]
        p0: f64,
        #[arg(long, default_value_t = 0.02)]
        q: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 5_000)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        drop_negative: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certificate for the qutrit IQO channel outside LOP; exit 0 iff the verdict holds.
    Counterexample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named check suite.
    Verify {
        #[arg(long, value_enum)]
        suite: verify::Suite,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of random cases.
        #[arg(long, default_value_t = 20)]
        cases: usize,
        /// Overrides the suite's pass tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 2.
    Input(String),
    /// A check ran and failed: exit 1.
    Check(String),
}

impl CliError {
    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!("{}: malformed JSON at line {} column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(CliError::input)
        }
    }
}

fn emit_json(v: &Value, out: &Option<PathBuf>) -> Result<(), CliError> {
    emit(&(to_canonical_string(v) + "\n"), out)
}

fn path_json(p: &OutcomePath) -> Value {
    json!({
        "outcomes": p.outcomes,
        "probability": p.probability,
        "layout": p.layout.to_json(),
        "state": state_to_json(&p.state),
    })
}

fn run(protocol: &Path, state: &Path, mode: RunMode, seed: u64) -> Result<Value, CliError> {
    let p = read_json(protocol)?;
    let layout = SystemLayout::from_json(p.get("layout").ok_or_else(|| CliError::Input("protocol file needs `layout`".into()))?)
        .map_err(CliError::input)?;
    let tree = ProtocolTree::from_json(p.get("tree").ok_or_else(|| CliError::Input("protocol file needs `tree`".into()))?)
        .map_err(CliError::input)?;
    let rho = state_from_json(&read_json(state)?).map_err(CliError::input)?;
    let mode = match mode {
        RunMode::Average => Mode::Average,
        RunMode::Branches => Mode::AllBranches,
        RunMode::Sampled => Mode::Sampled(seed),
    };
    Ok(match execute(&tree, &rho, &layout, mode).map_err(CliError::input)? {
        Execution::Average { state, layout } => {
            json!({"mode": "average", "layout": layout.to_json(), "state": state_to_json(&state)})
        }
        Execution::Branches(rep) => json!({
            "mode": "branches",
            "paths": rep.paths.iter().map(path_json).collect::<Vec<_>>(),
            "pruned": rep.pruned.iter().map(|(o, p)| json!({"outcomes": o, "probability": p})).collect::<Vec<_>>(),
            "total_probability": rep.total_probability(),
        }),
        Execution::Sampled(p) => json!({"mode": "sampled", "seed": seed, "path": path_json(&p)}),
    })
}

fn prepare(target: Target, n: usize, topology: Wiring) -> Result<Value, CliError> {
    let topo = match topology {
        Wiring::SingleWire => Topology::SingleWire,
        Wiring::Chain => Topology::Chain,
    };
    let prep = match target {
        Target::Ghz => prepare_ghz(n, topo),
        Target::W => prepare_w(n, topo),
    }
    .map_err(CliError::input)?;
    let rho = prep.run().map_err(CliError::input)?;
    let fidelity = prep.fidelity().map_err(CliError::input)?;
    Ok(json!({
        "target": match target { Target::Ghz => "ghz", Target::W => "w" },
        "n": n,
        "topology": match topology { Wiring::SingleWire => "single-wire", Wiring::Chain => "chain" },
        "outputs": prep.outputs,
        "input_layout": prep.layout.to_json(),
        "input": state_to_json(&prep.input),
        "state": state_to_json(&DensityMatrix::from_unchecked(rho)),
        "fidelity": fidelity,
    }))
}

fn distill_csv(params: &DistillParams) -> Result<String, CliError> {
    let trace = run_chain(params).map_err(CliError::input)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "mean_p_half", "std_p_half", "survivors"]).map_err(CliError::input)?;
    for r in &trace.records {
        w.write_record([
            r.step.to_string(),
            format!("{:.16e}", r.mean_p_half),
            format!("{:.16e}", r.std_p_half),
            format!("{:.16e}", r.survivors),
        ])
        .map_err(CliError::input)?;
    }
    String::from_utf8(w.into_inner().map_err(CliError::input)?).map_err(CliError::input)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run { protocol, state, mode, seed, out } => emit_json(&run(&protocol, &state, mode, seed)?, &out),
        Cmd::Prepare { target, n, topology, out } => emit_json(&prepare(target, n, topology)?, &out),
        Cmd::Monotone { state, layout, out } => {
            let layout = SystemLayout::from_json(&read_json(&layout)?).map_err(CliError::input)?;
            let rho = state_from_json(&read_json(&state)?).map_err(CliError::input)?;
            let r = monotone_report(rho.matrix(), &layout).map_err(CliError::input)?;
            emit_json(&r.to_json(), &out)
        }
        Cmd::Distill { p0, q, trials, steps, seed, drop_negative, out } => {
            emit(&distill_csv(&DistillParams { p0, q, trials, steps, seed, drop_negative })?, &out)
        }
        Cmd::Counterexample { out } => {
            let ch = build_counterexample();
            let cert = certify_not_lop(&ch);
            let mut v = cert.to_json();
            v["kraus"] = Value::Array(ch.kraus().iter().map(matrix_to_json).collect());
            emit_json(&v, &out)?;
            if cert.verdict {
                Ok(())
            } else {
                Err(CliError::Check("certificate premises do not hold".into()))
            }
        }
        Cmd::Verify { suite, seed, cases, tol, out } => {
            if let Some(t) = tol {
                if !(t > 0.0) {
                    return Err(CliError::Input("--tol must be positive".into()));
                }
            }
            if cases == 0 {
                return Err(CliError::Input("--cases must be positive".into()));
            }
            let report = verify::run_suite(suite, seed, cases, tol)?;
            emit_json(&report.to_json(), &out)?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Check(format!("suite `{}` failed", report.suite)))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
