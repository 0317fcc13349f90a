use thiserror::Error;

use crate::party::Party;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm {0:.12})")]
    NotNormalized(f64),

    #[error("Kraus operators are not complete (max deviation {0:.3e})")]
    IncompleteKraus(f64),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("subsystem label `{0}` is already in use")]
    LabelCollision(String),

    #[error("invalid bipartition: {0}")]
    InvalidCut(String),

    #[error("{party} does not own subsystem `{label}`")]
    Ownership { party: Party, label: String },

    #[error("locality violation: {0}")]
    Locality(String),

    #[error("subsystems {0:?} are entangled with the rest of the state and cannot be discarded")]
    NotProduct(Vec<String>),

    #[error("enumeration exceeded {0} branches; use sampling instead")]
    BranchOverflow(usize),

    #[error("correction oracle disagreement: {0}")]
    OracleDisagreement(String),

    #[error("gate is not locally equivalent to a Clifford gate: {0}")]
    NotInL(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OracleDisagreement(_) => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}
