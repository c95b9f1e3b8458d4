//! Crate-wide error types.

use thiserror::Error;

/// Errors from combinatorial geometry operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("arithmetic overflow computing {what} for d={d}, sides={sides:?}")]
    Overflow {
        what: &'static str,
        d: usize,
        sides: Vec<u64>,
    },
    #[error("projection index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("cube clustering did not terminate after {0} rounds")]
    ClusterNoTermination(usize),
    #[error("cluster output violated clause: {0}")]
    ClusterClause(&'static str),
}

/// Errors from the disorder model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RandomError {
    #[error("invalid potential law: {0}")]
    InvalidLaw(String),
    #[error("edge {0} missing from disorder sample")]
    MissingEdge(String),
    #[error("empty edge list")]
    EmptyEdges,
}

/// Errors from finite-element assembly.
#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("mesh too coarse: M={0} (need M >= 2)")]
    MeshTooCoarse(usize),
    #[error(transparent)]
    Random(#[from] RandomError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("box is not {0:?}-decomposable")]
    NotDecomposable(Vec<usize>),
    #[error("box is not decomposable at all (fully interactive)")]
    FullyInteractive,
}

/// Errors from eigen/linear solvers.
#[derive(Debug, Error, Clone)]
pub enum SolveError {
    #[error("eigensolver did not converge after {iters} iterations (best residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("shift E={energy} is within {dist:.3e} of the spectrum (resonance)")]
    Resonance { energy: f64, dist: f64 },
    #[error("spectral ceiling {ceiling} too low to certify distance to E={energy}")]
    CeilingTooLow { ceiling: f64, energy: f64 },
    #[error("requested accuracy {requested:.3e} unreachable (achieved {achieved:.3e})")]
    Accuracy { requested: f64, achieved: f64 },
    #[error("matrix factorization failed: {0}")]
    Factorization(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Errors from localization diagnostics.
#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Random(#[from] RandomError),
    #[error("geometry precondition violated: {0}")]
    GeometryPrecondition(String),
    #[error("boxes are not pre-separable")]
    NotPreSeparable,
    #[error("supports are not disjoint at distance >= 1")]
    SupportsTooClose,
    #[error("no eigenvalue found in interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error("semigroup accuracy inconclusive: {0}")]
    Inconclusive(String),
}

/// Errors from the MSA scale scheduler.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("infeasible schedule: {constraint}")]
    Infeasible { constraint: String },
    #[error("mass limit is non-positive ({0})")]
    NonPositiveLimit(f64),
}

/// Errors from configuration loading and validation.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config validation: {field}: {message}")]
    Invalid { field: String, message: String },
}
