use std::process::Command;

use lobc::harness::{
    execute, execute_with_threads, write_report, CommandKind, ExperimentConfig, GateSpec, ModeName, NamedGate,
    OutputFormat, ProtocolName, StateSpec,
};

fn u2_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(CommandKind::Run);
    c.protocol = Some(ProtocolName::U2);
    c.gate = Some(GateSpec::Angles(0.3, 0.5, 0.7));
    c.rounds = 2;
    c.trials = 300;
    c.seed = 7;
    c
}

#[test]
fn same_config_and_seed_give_identical_payloads() {
    let c = u2_config();
    let a = execute(&c).unwrap().payload_without_timestamp().unwrap();
    let b = execute_with_threads(&c, Some(1)).unwrap().payload_without_timestamp().unwrap();
    assert_eq!(a, b);
    let mut other = c.clone();
    other.seed = 8;
    assert_ne!(a, execute(&other).unwrap().payload_without_timestamp().unwrap());
}

#[test]
fn report_keys_follow_the_fixed_order() {
    let report = execute(&u2_config()).unwrap();
    let mut buf = Vec::new();
    write_report(&report, OutputFormat::Json, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let keys = ["\"config\"", "\"protocol\"", "\"predicted\"", "\"measured\"", "\"ledger\"", "\"version\"", "\"seed\"", "\"timestamp\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(&format!("\n  {k}")).expect(k)).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
}

#[test]
fn csv_has_one_row_per_trial() {
    let report = execute(&u2_config()).unwrap();
    let mut buf = Vec::new();
    write_report(&report, OutputFormat::Csv, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 301);
}

#[test]
fn enumerate_command_forces_enumeration() {
    let mut c = ExperimentConfig::new(CommandKind::Enumerate);
    c.protocol = Some(ProtocolName::U2e);
    c.mode = ModeName::Sample;
    let report = execute(&c).unwrap();
    assert_eq!(report.protocol.unwrap().branches_or_trials, 16);
}

#[test]
fn classify_cnot() {
    let mut c = ExperimentConfig::new(CommandKind::Classify);
    c.gate = Some(GateSpec::Named(NamedGate::Cnot));
    let result = execute(&c).unwrap().result.unwrap();
    assert_eq!(result["in_L"], true);
    let class = result["canonical_class"].as_array().unwrap();
    assert!((class[0].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
}

#[test]
fn entanglement_of_eta_4() {
    let mut c = ExperimentConfig::new(CommandKind::Entanglement);
    c.state = Some(StateSpec::Eta);
    c.d = 4;
    let result = execute(&c).unwrap().result.unwrap();
    assert!((result["report"]["entropy"].as_f64().unwrap() - 1.7925).abs() < 1e-4);
    assert!((result["report"]["e_max"].as_f64().unwrap() - 1.8999).abs() < 1e-4);
}

#[test]
fn chermitian_defaults_to_random_instance() {
    let mut c = ExperimentConfig::new(CommandKind::Enumerate);
    c.protocol = Some(ProtocolName::Chermitian);
    c.d_a = 3;
    c.d_b = 4;
    let m = execute(&c).unwrap().measured.unwrap();
    assert!(m.min_fidelity_on_success > 1.0 - 1e-9);
}

#[test]
fn u2_without_gate_is_rejected() {
    let mut c = u2_config();
    c.gate = None;
    assert_eq!(execute(&c).unwrap_err().exit_code(), 2);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lobc")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let ok = cli(&["bounds", "--rounds", "3"]);
    assert!(ok.status.success());
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["result"]["ebit_budget"], 25);

    assert_eq!(cli(&["classify", "--gate", "toffoli"]).status.code(), Some(2));
    assert_eq!(cli(&["run", "--protocol", "u2"]).status.code(), Some(2));

    let overflow = cli(&["enumerate", "--protocol", "u2", "--angles", "0.3,0.5,0.7", "--max-branches", "10"]);
    assert_eq!(overflow.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&overflow.stderr).contains("--max-branches"));
}

#[test]
fn cli_gap_report() {
    let out = cli(&["run", "--protocol", "locc-baseline", "--s", "1024", "--trials", "20"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ledger"]["allocated_ebits"], 2.0);
    assert_eq!(v["predicted"]["lobc_lower_bound"], 10.0);
    assert_eq!(v["protocol"]["broadcast_only"], false);
}

#[test]
fn cli_writes_to_out_path() {
    let path = std::env::temp_dir().join(format!("lobc-test-{}.csv", std::process::id()));
    let out = cli(&["run", "--protocol", "qswap", "--d", "3", "--trials", "10", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("index,probability,success"));
    assert_eq!(text.lines().count(), 11);
}
