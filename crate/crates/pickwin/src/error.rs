//! Crate-wide error type.

use crate::likelihood::ModelParams;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Structural validation failure on an input value.
    #[error("invalid {what}: {details}")]
    Invalid { what: &'static str, details: String },

    /// A coefficient vector is missing for a founding year the data needs.
    #[error("no drift coefficients for founding year {year}")]
    MissingYear { year: i32 },

    /// A vector length does not match the model's feature dimension.
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A company id referenced by one input is absent from another.
    #[error("company {company_id} missing from {from}")]
    UnknownCompany { company_id: String, from: &'static str },

    /// A parameter sits exactly on its support boundary, where the
    /// reparameterised gradient is undefined. Move it strictly inside.
    #[error(
        "parameter {name} lies on its support boundary; \
         project it strictly inside the support before differentiating"
    )]
    BoundaryParameter { name: &'static str },

    /// Every optimisation restart failed; carries the best partial iterate.
    #[error("all {restarts} restarts failed to produce a finite optimum")]
    FitFailed {
        restarts: usize,
        best: Option<Box<ModelParams>>,
    },

    /// A feature row has no observed entries, so imputation cannot anchor it.
    #[error("feature row '{name}' has no observed entries")]
    EmptyFeatureRow { name: String },

    /// A feature column has no observed entries.
    #[error("feature column '{company_id}' has no observed entries")]
    EmptyFeatureColumn { company_id: String },

    /// Exhaustive subset search is capped to keep runtimes bounded.
    #[error("exhaustive search supports at most {limit} events, got {got}")]
    TooManyEvents { limit: usize, got: usize },

    /// Malformed record in an input file.
    #[error("{path}: {details}")]
    Parse { path: String, details: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, details: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            details: details.into(),
        }
    }
}
