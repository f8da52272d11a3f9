use itertools::Itertools;

use super::intersect::intersect;
use super::point::Point;
use super::polytope::{hull_unchecked, Polytope};
use super::{check_dimension, check_same, GeometryError, Result};
use crate::scalar::Scalar;

/// Intersection of the hulls of every sub-multiset of size `|points| - f`.
///
/// Duplicated points are kept: they are distinct members of the multiset.
/// The result may be empty; it is non-empty whenever
/// `|points| >= (d + 1) f + 1`.
pub fn safe_area<T: Scalar>(points: &[Point<T>], f: usize) -> Result<Polytope<T>> {
    if points.len() <= f {
        return Err(GeometryError::TooFewPoints {
            len: points.len(),
            f,
        });
    }
    let d = points[0].dim();
    check_dimension(d)?;
    for p in points {
        check_same(d, p.dim())?;
    }
    if f == 0 {
        return Ok(hull_unchecked(d, points.to_vec()));
    }
    let mut acc: Option<Polytope<T>> = None;
    for dropped in (0..points.len()).combinations(f) {
        let kept: Vec<Point<T>> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| !dropped.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        let h = hull_unchecked(d, kept);
        let next = match acc {
            None => h,
            Some(a) => intersect(&[a, h])?,
        };
        if next.is_empty() {
            return Ok(next);
        }
        acc = Some(next);
    }
    Ok(acc.expect("at least one subset"))
}
