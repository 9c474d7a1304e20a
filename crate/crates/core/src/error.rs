use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("variable name `{0}` is already in use")]
    DuplicateName(String),
    #[error("variable `{name}` has inverted bounds [{lo}, {hi}]")]
    InvertedBounds { name: String, lo: i64, hi: i64 },
    #[error("variable name must be nonempty")]
    EmptyName,
    #[error("unknown variable id {0}")]
    UnknownVar(usize),
    #[error("variable id {0} appears twice in one constraint")]
    DuplicateTerm(usize),
    #[error("assignment has no value for variable id {0}")]
    MissingValue(usize),
    #[error("invalid congruence spec: {0}")]
    InvalidSpec(String),
    #[error("variable id {0} is not binary")]
    NotBinary(usize),
    #[error("cardinality bound {k} is outside [0, {len}]")]
    BadK { k: i64, len: usize },
    #[error("step {step} is outside [1, {len}]")]
    BadStep { step: usize, len: usize },
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("mapping has no value for csp variable `{0}`")]
    PartialMapping(String),
    #[error("value index {value} is outside the domain of size {size}")]
    BadValue { value: usize, size: usize },
    #[error("block for csp variable `{0}` is not one-hot")]
    NotOneHot(String),
    #[error("numerical failure in simplex: {0}")]
    NumericalFailure(String),
    #[error("search space of {size} assignments exceeds guard {guard}")]
    SearchSpaceTooLarge { size: u128, guard: u128 },
    #[error("model is invalid: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
