use thiserror::Error;

/// Errors raised across the library.
///
/// Validation errors (bad stencils, malformed tableaux, inconsistent grids)
/// map to exit code 2 in the CLI; `Invariant` maps to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("operator kind mismatch: {0}")]
    WrongKind(String),

    #[error("stencil class {class} not supported here: {context}")]
    UnsupportedClass { class: String, context: String },

    #[error("invalid Butcher tableau: {0}")]
    InvalidTableau(String),

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unstable for all tested step sizes (smallest tried: {smallest})")]
    NoStableStep { smallest: f64 },

    #[error("no instability found up to {largest}")]
    NoInstability { largest: f64 },

    #[error("blow-up at t = {t} (max |w| = {linf})")]
    Blowup { t: f64, linf: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
