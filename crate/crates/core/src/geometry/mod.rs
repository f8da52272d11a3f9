//! Exact convex geometry in one and two dimensions.
//!
//! Polytopes are stored by their extreme points only. Every constructor runs
//! the input through [`hull`], so two polytopes describe the same set exactly
//! when their vertex lists are equal. Vertex order is ascending for `d = 1`
//! and counter-clockwise from the lexicographically smallest vertex for
//! `d = 2`.

mod combine;
mod hausdorff;
mod intersect;
mod point;
mod polytope;
mod safe_area;

use thiserror::Error;

pub use combine::{linear_combination, WeightVector};
pub use hausdorff::{directed_sq_distance, hausdorff, hausdorff_sq, point_sq_distance};
pub use intersect::intersect;
pub use point::Point;
pub use polytope::{hull, Polytope};
pub use safe_area::safe_area;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("mixed dimensions: expected {expected}, found {found}")]
    MixedDimension { expected: usize, found: usize },
    #[error("unsupported dimension {0}; only d = 1 and d = 2 are implemented")]
    UnsupportedDimension(usize),
    #[error("operand {0} has a non-zero weight but is empty")]
    EmptyOperand(usize),
    #[error("invalid weights: {0}")]
    WeightMismatch(String),
    #[error("safe area needs more than f = {f} points, got {len}")]
    TooFewPoints { len: usize, f: usize },
    #[error("hausdorff distance is undefined for an empty polytope")]
    EmptyPolytope,
    #[error("nothing to intersect")]
    NoOperands,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub(crate) fn check_dimension(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(GeometryError::UnsupportedDimension(d))
    }
}

pub(crate) fn check_same(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::MixedDimension { expected, found })
    }
}
