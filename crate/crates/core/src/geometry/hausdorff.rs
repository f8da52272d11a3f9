use super::point::Point;
use super::polytope::Polytope;
use super::{check_same, GeometryError, Result};
use crate::scalar::{max_of, min_of, to_f64, Scalar};

/// Squared distance from `p` to the segment `[a, b]`.
fn segment_sq_distance<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>) -> T {
    let ab = b - a;
    let ap = p - a;
    let len = ab.norm_sq();
    if len.is_zero() {
        return ap.norm_sq();
    }
    let t = ap.dot(&ab) / len;
    let t = min_of(max_of(t, T::zero()), T::one());
    let foot = a + &ab.scale(&t);
    (p - &foot).norm_sq()
}

/// Exact squared Euclidean distance from `p` to a non-empty polytope.
pub fn point_sq_distance<T: Scalar>(p: &Point<T>, h: &Polytope<T>) -> Result<T> {
    check_same(h.dim(), p.dim())?;
    let v = h.vertices();
    if v.is_empty() {
        return Err(GeometryError::EmptyPolytope);
    }
    if h.contains_point(p)? {
        return Ok(T::zero());
    }
    if v.len() == 1 {
        return Ok((p - &v[0]).norm_sq());
    }
    if h.dim() == 1 {
        return Ok(segment_sq_distance(p, &v[0], &v[1]));
    }
    let m = v.len();
    let edges = if m == 2 { 1 } else { m };
    let mut best: Option<T> = None;
    for i in 0..edges {
        let dist = segment_sq_distance(p, &v[i], &v[(i + 1) % m]);
        best = Some(match best {
            None => dist,
            Some(b) => min_of(b, dist),
        });
    }
    Ok(best.expect("polygon has edges"))
}

/// Squared directed distance `max_{a in from} min_{b in to} |a - b|^2`.
///
/// Distance to a convex set is convex, so the maximum is attained at a
/// vertex of `from`.
pub fn directed_sq_distance<T: Scalar>(from: &Polytope<T>, to: &Polytope<T>) -> Result<T> {
    if from.is_empty() || to.is_empty() {
        return Err(GeometryError::EmptyPolytope);
    }
    check_same(from.dim(), to.dim())?;
    let mut best = T::zero();
    for v in from.vertices() {
        best = max_of(best, point_sq_distance(v, to)?);
    }
    Ok(best)
}

/// Exact squared Hausdorff distance.
pub fn hausdorff_sq<T: Scalar>(h1: &Polytope<T>, h2: &Polytope<T>) -> Result<T> {
    Ok(max_of(
        directed_sq_distance(h1, h2)?,
        directed_sq_distance(h2, h1)?,
    ))
}

/// Hausdorff distance; the square root is the only inexact step.
pub fn hausdorff<T: Scalar>(h1: &Polytope<T>, h2: &Polytope<T>) -> Result<f64> {
    Ok(to_f64(&hausdorff_sq(h1, h2)?).sqrt())
}
