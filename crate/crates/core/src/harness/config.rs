use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::gates::{cnot, cz, iswap, swap};
use crate::linalg::{haar_random_unitary, substream, ComplexMatrix};
use crate::magic::m_gate;

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => {
                        let options: Vec<&str> = $name::ALL.iter().map(|v| v.as_str()).collect();
                        Err(Error::InvalidParameter(format!("unknown value `{s}`; expected one of {}", options.join(", "))))
                    }
                }
            }
        }
    };
}

keyword_enum!(CommandKind {
    Decompose => "decompose",
    Classify => "classify",
    Run => "run",
    Enumerate => "enumerate",
    Entanglement => "entanglement",
    Bounds => "bounds",
});

keyword_enum!(ProtocolName {
    U2e => "u2e",
    U2 => "u2",
    Chermitian => "chermitian",
    Qswap => "qswap",
    LoccBaseline => "locc-baseline",
});

keyword_enum!(ModeName {
    Sample => "sample",
    Enumerate => "enumerate",
});

keyword_enum!(OutputFormat {
    Json => "json",
    Csv => "csv",
});

keyword_enum!(
    /// Two-party states for the `entanglement` command.
    StateSpec {
        Eta => "eta",
        PhiPlus => "phi+",
        Product => "product",
        Random => "random",
    }
);

keyword_enum!(NamedGate {
    Identity => "identity",
    Cnot => "cnot",
    Cz => "cz",
    Swap => "swap",
    Iswap => "iswap",
});

impl NamedGate {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            NamedGate::Identity => ComplexMatrix::identity(4),
            NamedGate::Cnot => cnot(),
            NamedGate::Cz => cz(),
            NamedGate::Swap => swap(),
            NamedGate::Iswap => iswap(),
        }
    }
}

/// A two-qubit gate: a named gate, `M(α,β,γ)` from an angle triple
/// `a,b,c` (radians), or a Haar-random unitary `haar:<seed>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateSpec {
    Named(NamedGate),
    Angles(f64, f64, f64),
    Haar(u64),
}

impl GateSpec {
    pub fn matrix(&self) -> ComplexMatrix {
        match *self {
            GateSpec::Named(g) => g.matrix(),
            GateSpec::Angles(a, b, c) => m_gate(a, b, c),
            GateSpec::Haar(seed) => haar_random_unitary(4, &mut substream(seed, 0)),
        }
    }
}

/// Parses `a,b,c` as three reals.
pub fn parse_angles(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!("expected three comma-separated angles, got `{s}`")));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidParameter(format!("invalid angle `{p}`")))?;
    }
    Ok((v[0], v[1], v[2]))
}

impl FromStr for GateSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(seed) = s.strip_prefix("haar:") {
            let seed = seed.parse().map_err(|_| Error::InvalidParameter(format!("invalid Haar seed in `{s}`")))?;
            return Ok(GateSpec::Haar(seed));
        }
        if s.contains(',') {
            let (a, b, c) = parse_angles(s)?;
            return Ok(GateSpec::Angles(a, b, c));
        }
        s.parse::<NamedGate>()
            .map(GateSpec::Named)
            .map_err(|_| Error::InvalidParameter(format!("invalid gate `{s}`; use a name, `a,b,c` or `haar:<seed>`")))
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::Named(g) => write!(f, "{g}"),
            GateSpec::Angles(a, b, c) => write!(f, "{a},{b},{c}"),
            GateSpec::Haar(seed) => write!(f, "haar:{seed}"),
        }
    }
}

impl Serialize for GateSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything needed to reproduce one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub protocol: Option<ProtocolName>,
    pub gate: Option<GateSpec>,
    pub rounds: usize,
    pub trials: usize,
    pub mode: ModeName,
    pub seed: u64,
    pub d_a: usize,
    pub d_b: usize,
    pub s: usize,
    pub d: usize,
    pub state: Option<StateSpec>,
    /// Computational-basis input, one digit per subsystem; random when absent.
    pub input: Option<Vec<usize>>,
    pub epsilon: Option<f64>,
    pub max_branches: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            protocol: None,
            gate: None,
            rounds: 1,
            trials: 10_000,
            mode: if command == CommandKind::Enumerate { ModeName::Enumerate } else { ModeName::Sample },
            seed: 0,
            d_a: 2,
            d_b: 2,
            s: 8,
            d: 2,
            state: None,
            input: None,
            epsilon: None,
            max_branches: 1 << 20,
            out: None,
            format: OutputFormat::Json,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_specs_roundtrip() {
        for s in ["cnot", "iswap", "haar:17", "0.3,0.5,0.7"] {
            let g: GateSpec = s.parse().unwrap();
            assert_eq!(g.to_string().parse::<GateSpec>().unwrap(), g);
        }
        assert!("toffoli".parse::<GateSpec>().is_err());
        assert!("1,2".parse::<GateSpec>().is_err());
        assert!("haar:x".parse::<GateSpec>().is_err());
    }

    #[test]
    fn config_serializes() {
        let mut c = ExperimentConfig::new(CommandKind::Run);
        c.protocol = Some(ProtocolName::LoccBaseline);
        c.gate = Some(GateSpec::Haar(3));
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"locc-baseline\"") && json.contains("\"haar:3\""));
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
