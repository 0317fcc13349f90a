//! Experiment configuration, dispatch and report files.

mod config;

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{
    parse_angles, CommandKind, ExperimentConfig, GateSpec, ModeName, NamedGate, OutputFormat, ProtocolName, StateSpec,
};

use crate::entanglement::{self, eta_d};
use crate::error::{Error, Result};
use crate::linalg::gates::{basis_projector, pauli};
use crate::linalg::random::{random_hermitian_unitary, random_projector, random_state};
use crate::linalg::{substream, ComplexMatrix, StateVector};
use crate::magic::{self, ANGLE_TOL};
use crate::protocols::{self, BranchRow, ProtocolReport, RunMode, U2Target};

/// Stream used for inputs and random protocol data; trials use streams `0..trials`.
const INPUT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolSection {
    pub name: String,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_gate: Option<ComplexMatrix>,
    pub mode: RunMode,
    pub branches_or_trials: usize,
    /// False for scripts that needed interactive communication.
    pub broadcast_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Predicted {
    pub success_probability: f64,
    pub ebits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lobc_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<protocols::EpsilonEbits>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Measured {
    pub success_probability: f64,
    pub success_std_error: f64,
    /// Sampling only: whether the empirical rate is within 4σ of the prediction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_4_sigma: Option<bool>,
    pub mean_fidelity_on_success: f64,
    pub min_fidelity_on_success: f64,
    pub inexact_successes: usize,
    pub total_probability: f64,
    pub pruned_mass: f64,
    pub touched_ebits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerSection {
    pub allocated_ebits: f64,
    pub declared_ebits: f64,
    pub cbits_broadcast: u64,
    pub per_step: Vec<(String, f64)>,
}

/// One invocation's output. Field order is the serialized key order.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Predicted>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<Measured>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<LedgerSection>,
    /// Output of the analysis commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub version: String,
    pub seed: u64,
    pub timestamp: u64,
    #[serde(skip)]
    pub rows: Vec<BranchRow>,
}

impl ReportFile {
    fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            protocol: None,
            predicted: None,
            measured: None,
            ledger: None,
            result: None,
            version: crate::VERSION.to_string(),
            seed: config.seed,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            rows: Vec::new(),
        }
    }

    fn from_protocol(config: &ExperimentConfig, r: ProtocolReport) -> Result<Self> {
        let epsilon = if r.protocol == "u2" && r.predicted_success < 1.0 {
            Some(protocols::epsilon_ebits(2.0 * (1.0 - r.predicted_success))?)
        } else {
            None
        };
        let within = match r.mode {
            RunMode::Sample { trials, .. } => {
                let p = r.predicted_success;
                let sigma = (p * (1.0 - p) / trials as f64).sqrt();
                Some((r.success_probability - p).abs() <= 4.0 * sigma + 1e-12)
            }
            RunMode::Enumerate { .. } => None,
        };
        let mut file = Self::new(config);
        file.protocol = Some(ProtocolSection {
            name: r.protocol,
            parameters: r.parameters,
            target_gate: r.target_gate,
            mode: r.mode,
            branches_or_trials: r.branches_or_trials,
            broadcast_only: !r.interactive,
        });
        file.predicted = Some(Predicted {
            success_probability: r.predicted_success,
            ebits: r.declared_ebits,
            lobc_lower_bound: r.lobc_lower_bound,
            epsilon,
        });
        file.measured = Some(Measured {
            success_probability: r.success_probability,
            success_std_error: r.success_std_error,
            within_4_sigma: within,
            mean_fidelity_on_success: r.mean_fidelity_on_success,
            min_fidelity_on_success: r.min_fidelity_on_success,
            inexact_successes: r.inexact_successes,
            total_probability: r.total_probability,
            pruned_mass: r.pruned_mass,
            touched_ebits: r.touched_ebits,
        });
        file.ledger = Some(LedgerSection {
            allocated_ebits: r.allocated_ebits,
            declared_ebits: r.declared_ebits,
            cbits_broadcast: r.cbits_broadcast,
            per_step: r.ebits_per_step,
        });
        file.rows = r.rows;
        Ok(file)
    }

    /// JSON text without the timestamp, for reproducibility checks.
    pub fn payload_without_timestamp(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            m.remove("timestamp");
        }
        Ok(serde_json::to_string(&v)?)
    }
}

fn input_state(config: &ExperimentConfig, dims: &[usize]) -> Result<StateVector> {
    let subs: Vec<(String, usize)> = dims.iter().enumerate().map(|(i, &d)| (format!("q{i}"), d)).collect();
    let refs: Vec<(&str, usize)> = subs.iter().map(|(l, d)| (l.as_str(), *d)).collect();
    match &config.input {
        Some(digits) => StateVector::basis_product(&refs, digits),
        None => Ok(random_state(&refs, &mut substream(config.seed, INPUT_STREAM))),
    }
}

fn run_mode(config: &ExperimentConfig) -> RunMode {
    match config.mode {
        ModeName::Enumerate => RunMode::Enumerate { max_branches: config.max_branches },
        ModeName::Sample => RunMode::Sample { trials: config.trials, seed: config.seed },
    }
}

fn run_protocol(config: &ExperimentConfig) -> Result<ProtocolReport> {
    let protocol = config
        .protocol
        .ok_or_else(|| Error::InvalidParameter("`run` needs --protocol".into()))?;
    let mode = run_mode(config);
    match protocol {
        ProtocolName::U2e => {
            let gate = config.gate.unwrap_or(GateSpec::Named(NamedGate::Cnot)).matrix();
            protocols::run_u2e(&gate, &input_state(config, &[2, 2])?, mode)
        }
        ProtocolName::U2 => {
            let target = match config.gate {
                Some(GateSpec::Angles(a, b, c)) => U2Target::Angles(a, b, c),
                Some(g) => U2Target::Gate(g.matrix()),
                None => return Err(Error::InvalidParameter("u2 needs --angles or --gate".into())),
            };
            protocols::run_u2(&target, config.rounds, &input_state(config, &[2, 2])?, mode)
        }
        ProtocolName::Chermitian => {
            let (p, v) = match config.gate {
                Some(GateSpec::Named(g @ (NamedGate::Cnot | NamedGate::Cz | NamedGate::Identity))) => {
                    let v = match g {
                        NamedGate::Cnot => pauli(1),
                        NamedGate::Cz => pauli(3),
                        _ => pauli(0),
                    };
                    (basis_projector(2, 1), v)
                }
                Some(g) => {
                    return Err(Error::InvalidParameter(format!(
                        "`{g}` is not a binary-controlled gate; use cnot, cz, identity or omit --gate"
                    )))
                }
                None => {
                    let mut rng = substream(config.seed, INPUT_STREAM - 1);
                    (random_projector(config.d_a, 1, &mut rng), random_hermitian_unitary(config.d_b, &mut rng))
                }
            };
            let psi = input_state(config, &[p.rows(), v.rows()])?;
            protocols::run_controlled_hermitian(&p, &v, &psi, mode)
        }
        ProtocolName::Qswap => protocols::run_qudit_swap(config.d, &input_state(config, &[config.d, config.d])?, mode),
        ProtocolName::LoccBaseline => {
            if config.s < 2 {
                return Err(Error::InvalidParameter(format!("s must be at least 2, got {}", config.s)));
            }
            let u_c = protocols::controlled_phase(config.s);
            protocols::run_locc_baseline(&u_c, &input_state(config, &[2, config.s])?, mode)
        }
    }
}

fn require_gate(config: &ExperimentConfig) -> Result<ComplexMatrix> {
    config
        .gate
        .map(|g| g.matrix())
        .ok_or_else(|| Error::InvalidParameter("this command needs --gate or --angles".into()))
}

fn decompose(config: &ExperimentConfig) -> Result<Value> {
    let u = require_gate(config)?;
    let f = magic::canonical_decompose(&u)?;
    let class = magic::weyl_chamber(f.alpha, f.beta, f.gamma);
    Ok(json!({
        "alpha": f.alpha,
        "beta": f.beta,
        "gamma": f.gamma,
        "canonical_class": [class.0, class.1, class.2],
        "local_pre": f.local_pre,
        "local_post": f.local_post,
        "phase": f.phase,
        "reconstruction_error": f.reconstruct().max_abs_diff(&u),
    }))
}

fn classify(config: &ExperimentConfig) -> Result<Value> {
    let u = require_gate(config)?;
    let class = magic::canonical_class(&u)?;
    Ok(json!({
        "in_L": magic::in_l(&u, ANGLE_TOL)?,
        "canonical_class": [class.0, class.1, class.2],
        "nonentangling": magic::is_nonentangling(&u, ANGLE_TOL)?,
        "invariants": magic::canonical_invariants(&u)?.phases,
    }))
}

fn entanglement_of(config: &ExperimentConfig) -> Result<Value> {
    let state = config.state.unwrap_or(StateSpec::Eta);
    let psi = match state {
        StateSpec::Eta => eta_d(config.d)?,
        StateSpec::PhiPlus => StateVector::max_entangled("A", "B", config.d)?,
        StateSpec::Product => StateVector::basis_product(&[("A", config.d_a), ("B", config.d_b)], &[0, 0])?,
        StateSpec::Random => random_state(&[("A", config.d_a), ("B", config.d_b)], &mut substream(config.seed, INPUT_STREAM)),
    };
    let report = entanglement::report(&psi, &["A"])?;
    Ok(json!({ "state": state, "dims": psi.dims(), "report": report }))
}

fn bounds(config: &ExperimentConfig) -> Result<Value> {
    let n = config.rounds;
    let p = protocols::predicted_success(n)?;
    let mut out = json!({
        "rounds": n,
        "predicted_success": p,
        "ebit_budget": protocols::ebit_budget(n)?,
        "epsilon_from_rounds": protocols::epsilon_ebits(2.0 * (1.0 - p))?,
        "s": config.s,
        "lobc_lower_bound": protocols::lobc_lower_bound(config.s)?,
    });
    if let Some(eps) = config.epsilon {
        out["epsilon"] = serde_json::to_value(protocols::epsilon_ebits(eps)?)?;
    }
    Ok(out)
}

/// Runs one configured command.
pub fn execute(config: &ExperimentConfig) -> Result<ReportFile> {
    match config.command {
        CommandKind::Run | CommandKind::Enumerate => {
            let mut config = config.clone();
            if config.command == CommandKind::Enumerate {
                config.mode = ModeName::Enumerate;
            }
            let report = run_protocol(&config)?;
            ReportFile::from_protocol(&config, report)
        }
        command => {
            let result = match command {
                CommandKind::Decompose => decompose(config)?,
                CommandKind::Classify => classify(config)?,
                CommandKind::Entanglement => entanglement_of(config)?,
                _ => bounds(config)?,
            };
            let mut file = ReportFile::new(config);
            file.result = Some(result);
            Ok(file)
        }
    }
}

/// Like [`execute`], inside a dedicated pool of `threads` workers. Results do
/// not depend on the thread count.
pub fn execute_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<ReportFile> {
    match threads {
        None => execute(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start {n} worker threads: {e}")))?
            .install(|| execute(config)),
    }
}

/// Writes the report as pretty JSON, or one CSV row per branch or trial.
pub fn write_report(report: &ReportFile, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            if report.protocol.is_none() {
                return Err(Error::InvalidParameter("CSV output is only available for `run` and `enumerate`".into()));
            }
            let mut w = csv::Writer::from_writer(out);
            for row in &report.rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes the report to `path`, or to standard output when `None`.
pub fn save_report(report: &ReportFile, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            write_report(report, format, &mut f)?;
            f.flush()?;
            Ok(())
        }
        None => write_report(report, format, &mut std::io::stdout().lock()),
    }
}
