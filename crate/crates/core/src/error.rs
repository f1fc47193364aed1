use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants are grouped by what a caller can do about them: bad input
/// (geometry, dimensions, preconditions), numerical breakdown, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate simplex {index}: volume {volume:e}")]
    DegenerateSimplex { index: usize, volume: f64 },

    #[error("unsupported dimension {dim} for {operation}")]
    UnsupportedDimension { dim: usize, operation: &'static str },

    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),

    #[error("mesh is not conforming: {0}")]
    NonConforming(String),

    #[error("refinement closure did not terminate after {iterations} steps (incompatible initial tagging)")]
    ClosureDiverged { iterations: usize },

    #[error("mesh {fine} is not a refinement of mesh {coarse}: {reason}")]
    NotARefinement {
        coarse: String,
        fine: String,
        reason: String,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("undefined mean over an empty region")]
    EmptyRegion,

    #[error("adaptive iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the numerical kernels rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::AtIteration { source, .. } => source.is_numerical(),
            _ => matches!(self, Error::NotPositiveDefinite { .. } | Error::NumericalFailure(_)),
        }
    }

    pub fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration { iteration, source: Box::new(self) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
