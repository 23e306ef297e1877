use thiserror::Error;

use crate::projections::ProjectionReport;
use crate::solvers::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: relative asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    Asymmetric { asymmetry: f64, tolerance: f64 },

    #[error("negative weight {value:e} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },

    #[error("sign pattern inconsistent with matrix: s*a = {value:e} at ({row}, {col})")]
    NegativeResult { row: usize, col: usize, value: f64 },

    #[error("invalid sign pattern entry {value} at ({row}, {col})")]
    InvalidSign { row: usize, col: usize, value: i8 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} is undefined for fewer than two nodes")]
    Undefined(&'static str),

    #[error("eigendecomposition did not converge at index {index}")]
    EigenNoConvergence { index: usize },

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("projection did not converge after {} cycles (max residual {:e})", .0.cycles, .0.max_residual())]
    ProjectionNotConverged(Box<ProjectionReport>),

    #[error("constraint sets appear to have empty intersection (residual plateau at {:e})", .0.max_residual())]
    EmptyIntersectionSuspected(Box<ProjectionReport>),

    #[error("solver did not reach a feasible point (max residual {:e})", .0.max_residual())]
    NotConverged(Box<SolveReport>),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unknown export format `{0}`")]
    UnknownFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised while reading time-series or graph files. Rows and columns
/// are 1-based, counting the header as row 1.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,

    #[error("header has no columns")]
    NoColumns,

    #[error("no data rows")]
    NoRows,

    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {col}: cannot parse `{cell}` as a number")]
    NotNumeric {
        row: usize,
        col: usize,
        cell: String,
    },

    #[error("row {row}, column {col}: non-finite value")]
    NonFinite { row: usize, col: usize },

    #[error("malformed graph file: {0}")]
    Graph(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
