//! Engine-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("reducible minimal polynomial: factor {factor} found")]
    ReduciblePolynomial { factor: String },

    #[error("embedding approximation does not isolate a single root ({0})")]
    NonIsolating(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("operands live in different number fields ({0})")]
    FieldMismatch(String),

    #[error("parameter lists differ: {0}")]
    ParamMismatch(String),

    #[error("root not representable over the current generator: {0}")]
    UnsupportedRoot(String),

    #[error("series operation not defined: {0}")]
    Series(String),

    #[error("evaluation at the singular point")]
    EvalAtSingularity,

    #[error("unbound parameter {0}")]
    UnboundParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no power-series solution: logarithmic obstruction at offset {offset} ({detail})")]
    LogarithmNeeded { offset: String, detail: String },

    #[error("generation rejected: {0}")]
    Rejected(String),

    #[error("verification failure at exponent {exponent}: {detail}")]
    VerifyFailure { exponent: String, detail: String },

    #[error("no convergence certificate: {0}")]
    NoCertificate(String),

    #[error("denominator vanishes: {0}")]
    DenominatorZero(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
