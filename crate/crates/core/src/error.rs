//! Crate-wide error type.

/// Errors reported by domain construction, evaluation and analysis routines.
///
/// Solver non-convergence is not an error: `solver::solve` returns a
/// [`crate::Solution`] with `converged = false` so partial progress
/// (`t_reached`, residual norm) stays inspectable.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested grid cannot represent the region with node-aligned
    /// boundaries. Carries the smallest compatible node counts when known.
    #[error("incompatible grid: {message}")]
    IncompatibleGrid {
        message: String,
        suggested_nx: Option<usize>,
        suggested_ny: Option<usize>,
    },

    /// Evaluation point lies outside a closed form's strip of definition.
    #[error("outside domain of definition: {0}")]
    OutsideDomain(String),

    /// Two fields live on grids that cannot be compared node by node.
    #[error("grids are not nested: {0}")]
    NotNested(String),

    /// Surface and foliation gradients coincide everywhere; the tangency
    /// set is a continuum and no count is defined.
    #[error("leaf coincidence: surface and foliation gradients agree everywhere")]
    LeafCoincidence,

    #[error("integration aborted: {0}")]
    IntegrationAborted(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
