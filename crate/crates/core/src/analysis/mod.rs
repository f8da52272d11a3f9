//! Offline checks over a finished trace.
//!
//! The trace is re-indexed into a [`TraceView`]; transition matrices and the
//! polytope vector are rebuilt from it and compared against what the nodes
//! actually computed.

mod checks;
mod matrix;
mod view;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use checks::{check_suite, compute_i_z, CheckResult, Report};
pub use matrix::{build_matrix, matrix_apply, Ergodicity, Matrix, TransitionMatrix};
pub use view::{SendRecord, TraceView};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("incomplete trace: {0}")]
    IncompleteTrace(String),
    #[error("matrix is not row stochastic")]
    NotStochastic,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
