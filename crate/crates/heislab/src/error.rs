use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: n = {0} vs n = {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid too small: every axis needs at least 5 nodes, got {0}x{1}x{2}")]
    GridTooSmall(usize, usize, usize),
    #[error("field contains non-finite values")]
    NonFiniteField,
    #[error("grids are incompatible: {0}")]
    GridMismatch(String),
    #[error("quadrature did not converge: relative change {0:.3e} between resolutions")]
    QuadratureNotConverged(f64),
    #[error("sup sampling too sparse: relative change {0:.3e} between densities")]
    SupNotStabilized(f64),
    #[error("largeness condition not met: {0}")]
    ConditionNotMet(String),
    #[error("iteration did not converge within {0} steps (residual {1:.3e})")]
    NotConverged(usize, f64),
    #[error("too few diagnostic rows: {0} (need at least {1})")]
    TooFewRows(usize, usize),
    #[error("test function support touches the grid boundary")]
    SupportTouchesBoundary,
    #[error("dilated evaluation point escapes the source box")]
    EscapesSourceBox,
    #[error("bound inequality violated at {point:?}: lhs {lhs:.6e} > rhs {rhs:.6e}")]
    BoundViolated {
        point: (f64, f64, f64),
        lhs: f64,
        rhs: f64,
    },
    #[error("run too short to fit a decay rate ({0} usable rows)")]
    RunTooShort(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
