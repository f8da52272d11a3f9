use super::point::{cross, Point};
use super::{check_dimension, check_same, Result};
use crate::scalar::Scalar;

/// Vertex-represented convex polytope. The vertex list is always canonical,
/// see the module docs. An empty list is the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polytope<T> {
    dim: usize,
    vertices: Vec<Point<T>>,
}

/// Convex hull of a multiset of points, in canonical form.
pub fn hull<T: Scalar>(points: &[Point<T>]) -> Result<Polytope<T>> {
    let Some(first) = points.first() else {
        // Dimension is unknown for an empty multiset; callers that care use
        // `Polytope::empty`.
        return Ok(Polytope {
            dim: 0,
            vertices: Vec::new(),
        });
    };
    let d = first.dim();
    check_dimension(d)?;
    for p in points {
        check_same(d, p.dim())?;
    }
    Ok(hull_unchecked(d, points.to_vec()))
}

pub(crate) fn hull_unchecked<T: Scalar>(d: usize, mut pts: Vec<Point<T>>) -> Polytope<T> {
    if pts.is_empty() {
        return Polytope::empty(d);
    }
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    if pts.len() <= 2 || d == 1 {
        let lo = pts[0].clone();
        let hi = pts[pts.len() - 1].clone();
        let vertices = if lo == hi { vec![lo] } else { vec![lo, hi] };
        return Polytope { dim: d, vertices };
    }
    // Andrew's monotone chain; collinear points are dropped.
    let mut lower: Vec<Point<T>> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= T::zero()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point<T>> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= T::zero()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Polytope {
        dim: d,
        vertices: lower,
    }
}

impl<T: Scalar> Polytope<T> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            vertices: Vec::new(),
        }
    }

    pub fn point(p: Point<T>) -> Self {
        Self {
            dim: p.dim(),
            vertices: vec![p],
        }
    }

    pub fn interval(lo: T, hi: T) -> Self {
        hull_unchecked(1, vec![Point::new(vec![lo]), Point::new(vec![hi])])
    }

    /// Hull of `points`, keeping `dim` even when `points` is empty.
    pub fn from_points(dim: usize, points: &[Point<T>]) -> Result<Self> {
        check_dimension(dim)?;
        for p in points {
            check_same(dim, p.dim())?;
        }
        Ok(hull_unchecked(dim, points.to_vec()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Scales every point by a non-negative factor.
    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() && !self.is_empty() {
            return Self::point(Point::origin(self.dim));
        }
        Self {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.scale(c)).collect(),
        }
    }

    pub fn contains_point(&self, p: &Point<T>) -> Result<bool> {
        check_same(self.dim, p.dim())?;
        let v = &self.vertices;
        Ok(match (self.dim, v.len()) {
            (_, 0) => false,
            (_, 1) => v[0] == *p,
            (1, _) => v[0].x() <= p.x() && p.x() <= v[1].x(),
            (_, 2) => on_segment(&v[0], &v[1], p),
            _ => (0..v.len()).all(|i| cross(&v[i], &v[(i + 1) % v.len()], p) >= T::zero()),
        })
    }

    /// True iff every point of `inner` lies in `self`.
    pub fn contains_polytope(&self, inner: &Polytope<T>) -> Result<bool> {
        if inner.is_empty() {
            return Ok(true);
        }
        check_same(self.dim, inner.dim)?;
        for v in &inner.vertices {
            if !self.contains_point(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Re-derives the canonical form and compares; used by trace validation.
    pub fn is_canonical(&self) -> bool {
        hull_unchecked(self.dim, self.vertices.clone()) == *self
    }

    pub(crate) fn from_canonical(dim: usize, vertices: Vec<Point<T>>) -> Self {
        debug_assert!(vertices.iter().all(|v| v.dim() == dim));
        Self { dim, vertices }
    }
}

pub(crate) fn on_segment<T: Scalar>(a: &Point<T>, b: &Point<T>, p: &Point<T>) -> bool {
    if cross(a, b, p) != T::zero() {
        return false;
    }
    let ap = p - a;
    let ab = b - a;
    let t = ap.dot(&ab);
    t >= T::zero() && t <= ab.norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational_ratio, Rational};

    fn p2(x: i64, y: i64) -> Point<Rational> {
        Point::new(vec![rational_ratio(x, 1), rational_ratio(y, 1)])
    }

    fn p1(x: i64) -> Point<Rational> {
        Point::new(vec![rational_ratio(x, 1)])
    }

    #[test]
    fn interval_hull_keeps_extremes() {
        let h = hull(&[p1(0), p1(4), p1(2)]).unwrap();
        assert_eq!(h.vertices(), &[p1(0), p1(4)]);
    }

    #[test]
    fn interior_point_is_dropped() {
        let q = Point::new(vec![rational_ratio(1, 4), rational_ratio(1, 4)]);
        let h = hull(&[p2(0, 0), p2(1, 0), p2(0, 1), q]).unwrap();
        assert_eq!(h.vertices(), &[p2(0, 0), p2(1, 0), p2(0, 1)]);
    }

    #[test]
    fn duplicates_collapse() {
        let h = hull(&[p2(1, 1), p2(1, 1)]).unwrap();
        assert_eq!(h.vertices(), &[p2(1, 1)]);
    }

    #[test]
    fn collinear_polygon_is_a_segment() {
        let h = hull(&[p2(2, 2), p2(0, 0), p2(1, 1), p2(3, 3)]).unwrap();
        assert_eq!(h.vertices(), &[p2(0, 0), p2(3, 3)]);
    }

    #[test]
    fn square_order_is_ccw_from_lex_min() {
        let h = hull(&[p2(1, 1), p2(0, 1), p2(1, 0), p2(0, 0), p2(1, 0)]).unwrap();
        assert_eq!(h.vertices(), &[p2(0, 0), p2(1, 0), p2(1, 1), p2(0, 1)]);
    }

    #[test]
    fn hull_rejects_bad_dimensions() {
        let p3 = Point::new(vec![rational_ratio(0, 1); 3]);
        assert!(matches!(
            hull(&[p3]),
            Err(super::super::GeometryError::UnsupportedDimension(3))
        ));
        assert!(matches!(
            hull(&[p1(0), p2(0, 0)]),
            Err(super::super::GeometryError::MixedDimension { .. })
        ));
    }

    #[test]
    fn containment_cases() {
        let i = Polytope::interval(rational_ratio(0, 1), rational_ratio(4, 1));
        assert!(i.contains_point(&p1(2)).unwrap());
        let tri = hull(&[p2(0, 0), p2(4, 0), p2(0, 4)]).unwrap();
        assert!(!tri.contains_point(&p2(3, 3)).unwrap());
        assert!(tri.contains_point(&p2(2, 2)).unwrap());
        assert!(tri.contains_polytope(&Polytope::empty(2)).unwrap());
        assert!(!Polytope::empty(2).contains_polytope(&tri).unwrap());
        assert!(Polytope::<Rational>::empty(2)
            .contains_polytope(&Polytope::empty(2))
            .unwrap());
        let seg = hull(&[p2(0, 0), p2(2, 2)]).unwrap();
        assert!(seg.contains_point(&p2(1, 1)).unwrap());
        assert!(!seg.contains_point(&p2(3, 3)).unwrap());
        assert!(!seg.contains_point(&p2(1, 0)).unwrap());
        assert!(i.contains_point(&p2(0, 0)).is_err());
    }

    #[test]
    fn float_instantiation_works() {
        let pts: Vec<Point<f64>> = vec![
            Point::new(vec![0.0, 0.0]),
            Point::new(vec![2.0, 0.0]),
            Point::new(vec![0.0, 2.0]),
            Point::new(vec![0.5, 0.5]),
        ];
        let h = hull(&pts).unwrap();
        assert_eq!(h.vertices().len(), 3);
        assert!(h.contains_point(&Point::new(vec![0.25, 0.25])).unwrap());
    }
}
