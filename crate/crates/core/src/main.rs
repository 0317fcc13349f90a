use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lobc::harness::{
    execute_with_threads, parse_angles, save_report, CommandKind, ExperimentConfig, GateSpec, ModeName, OutputFormat,
    ProtocolName, StateSpec,
};
use lobc::Error;

#[derive(Parser)]
#[command(name = "lobc", version, about = "Nonlocal gate protocols under local operations and broadcast communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical decomposition of a two-qubit gate.
    Decompose(Opts),
    /// Membership in L, canonical class and invariants of a gate.
    Classify(Opts),
    /// Run a protocol by sampling (default) or enumeration.
    Run(Opts),
    /// Run a protocol over every measurement branch.
    Enumerate(Opts),
    /// Entanglement entropy and E_max of a two-party state.
    Entanglement(Opts),
    /// Success probability and entanglement cost bounds.
    Bounds(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    protocol: Option<ProtocolName>,
    /// Named gate, `a,b,c` angle triple, or `haar:<seed>`.
    #[arg(long, conflicts_with = "angles")]
    gate: Option<GateSpec>,
    /// Angles of M(α,β,γ) as `a,b,c`.
    #[arg(long, value_parser = parse_angle_arg)]
    angles: Option<(f64, f64, f64)>,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    mode: Option<ModeName>,
    #[arg(long = "dA", default_value_t = 2)]
    d_a: usize,
    #[arg(long = "dB", default_value_t = 2)]
    d_b: usize,
    /// Size of the control alphabet for the LOCC baseline.
    #[arg(long, default_value_t = 8)]
    s: usize,
    /// Local dimension for qudit swap and `eta`/`phi+` states.
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    state: Option<StateSpec>,
    /// Basis input as comma-separated digits, one per subsystem.
    #[arg(long, value_delimiter = ',')]
    input: Option<Vec<usize>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1 << 20)]
    max_branches: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: OutputFormat,
    /// Worker threads for sampling; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_angle_arg(s: &str) -> Result<(f64, f64, f64), String> {
    parse_angles(s).map_err(|e| e.to_string())
}

fn build(command: CommandKind, o: Opts) -> (ExperimentConfig, Option<usize>) {
    let mut c = ExperimentConfig::new(command);
    c.protocol = o.protocol;
    c.gate = o.gate.or(o.angles.map(|(a, b, g)| GateSpec::Angles(a, b, g)));
    c.rounds = o.rounds;
    c.trials = o.trials;
    c.seed = o.seed;
    if let Some(m) = o.mode {
        c.mode = m;
    }
    c.d_a = o.d_a;
    c.d_b = o.d_b;
    c.s = o.s;
    c.d = o.d;
    c.state = o.state;
    c.input = o.input;
    c.epsilon = o.epsilon;
    c.max_branches = o.max_branches;
    c.out = o.out;
    c.format = o.format;
    (c, o.threads)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Command::Decompose(o) => (CommandKind::Decompose, o),
        Command::Classify(o) => (CommandKind::Classify, o),
        Command::Run(o) => (CommandKind::Run, o),
        Command::Enumerate(o) => (CommandKind::Enumerate, o),
        Command::Entanglement(o) => (CommandKind::Entanglement, o),
        Command::Bounds(o) => (CommandKind::Bounds, o),
    };
    let (config, threads) = build(command, opts);
    let result = execute_with_threads(&config, threads)
        .and_then(|report| save_report(&report, config.format, config.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::BranchOverflow(_)) {
                eprintln!("hint: raise --max-branches or use `run --mode sample --trials N`");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
