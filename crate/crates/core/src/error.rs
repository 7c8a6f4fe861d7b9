use std::path::PathBuf;

use thiserror::Error;

/// Diagnostics carried out of an SMO run that hit its iteration cap.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoDiagnostics {
    pub iterations: usize,
    /// Largest KKT violation (m(α) − M(α)) at the point the solver gave up.
    pub kkt_gap: f64,
    pub dual_objective: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("row {row}, column `{column}`: {message}")]
    MalformedRow {
        row: usize,
        column: String,
        message: String,
    },

    #[error("schema error in feature `{feature}`: {message}")]
    Schema { feature: String, message: String },

    #[error("schema hash mismatch: model was trained on {expected}, data has {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("interventions without records: {0:?}")]
    MissingInterventions(Vec<usize>),

    #[error("barrier `{0}` has no positive examples")]
    NoPositives(String),

    #[error("need at least {needed} positives to cross-validate, found {found}")]
    TooFewPositives { needed: usize, found: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("SMO did not converge after {} iterations (kkt gap {:.3e})", .0.iterations, .0.kkt_gap)]
    NonConvergence(SmoDiagnostics),

    #[error("unknown barrier `{0}`")]
    UnknownBarrier(String),

    #[error("intervention index {index} out of range (catalog has {count})")]
    UnknownIntervention { index: usize, count: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("generator gave up after {attempts} redraws without a positive barrier")]
    DegenerateGenerator { attempts: usize },

    #[error("fold {fold} of barrier `{barrier}`: {source}")]
    Fold {
        barrier: String,
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used by the CLI when reporting failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MissingFile(_) => "missing-file",
            Error::MalformedRow { .. } => "malformed-row",
            Error::Schema { .. } | Error::SchemaMismatch { .. } => "schema",
            Error::Dimension { .. } => "dimension",
            Error::Empty(_) => "empty-input",
            Error::MissingInterventions(_) | Error::UnknownIntervention { .. } => "intervention",
            Error::NoPositives(_) | Error::TooFewPositives { .. } | Error::SingleClass => "labels",
            Error::NonConvergence(_) => "non-convergence",
            Error::UnknownBarrier(_) => "barrier",
            Error::Config(_) | Error::UnknownStrategy { .. } => "config",
            Error::DegenerateGenerator { .. } => "generator",
            Error::Fold { source, .. } => source.kind(),
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
