use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// Explicit Euler-Maruyama diverges for step >= 2/lambda.
    #[error("unstable time step {step} (must be below 2/lambda = {limit})")]
    UnstableStep { step: f64, limit: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid fiber path: {0}")]
    InvalidPath(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error_estimate:e})")]
    QuadratureNonConvergence {
        subdivisions: usize,
        error_estimate: f64,
    },

    #[error("grid cell ({col}, {row}): {source}")]
    GridCell {
        col: usize,
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid observations: {0}")]
    InvalidObservations(String),

    /// All observations are 0 or all equal the horizon, so the cost is flat.
    #[error("degenerate observations: {0}")]
    DegenerateData(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
