use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("duplicate node `{0}`")]
    DuplicateNode(String),

    #[error("invalid edge {from} -> {to}: {reason}")]
    InvalidEdge {
        from: String,
        to: String,
        reason: &'static str,
    },

    #[error("edge {from} -> {to} produced a non-finite gain at omega = {omega:e} rad/s")]
    EdgeGain {
        from: String,
        to: String,
        omega: f64,
    },

    #[error("singular system at omega = {omega:e} rad/s")]
    Singular { omega: f64 },

    #[error("graph has {0} loops, more than the supported 65536")]
    TooManyLoops(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("undefined optimum: {0}")]
    UndefinedOptimum(String),

    #[error(
        "grid too coarse: only {points} samples inside the half-maximum band (need at least 8)"
    )]
    GridTooCoarse { points: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between mode fields")]
    GridMismatch,

    #[error("axis {axis} has {count} points; derivatives need at least 3")]
    DegenerateAxis { axis: char, count: usize },

    #[error("mode field is identically zero")]
    ZeroField,

    #[error("tensor element {0} is unknown")]
    MissingTensorElement(String),

    #[error("index ({0}, {1}) out of range, expected 1..=3")]
    IndexOutOfRange(usize, usize),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownNode(_)
            | Error::DuplicateNode(_)
            | Error::InvalidEdge { .. }
            | Error::TooManyLoops(_) => "graph",
            Error::EdgeGain { .. } => "edge-gain",
            Error::Singular { .. } => "singular",
            Error::InvalidParameter { .. } | Error::UnknownPreset(_) => "invalid-parameter",
            Error::ModelViolation(_) => "model-violation",
            Error::UndefinedOptimum(_) => "undefined-optimum",
            Error::GridTooCoarse { .. } => "grid-too-coarse",
            Error::InvalidGrid(_) => "grid",
            Error::GridMismatch | Error::DegenerateAxis { .. } | Error::ZeroField => "field",
            Error::MissingTensorElement(_) | Error::IndexOutOfRange(..) => "tensor",
            Error::Parse { .. } | Error::Json(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Error::Singular { .. })
    }

    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
