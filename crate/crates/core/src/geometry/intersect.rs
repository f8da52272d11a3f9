use super::point::Point;
use super::polytope::{hull_unchecked, Polytope};
use super::{check_dimension, check_same, GeometryError, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Closed half-plane `a x + b y <= c`.
#[derive(Debug, Clone)]
struct HalfPlane<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Scalar> HalfPlane<T> {
    fn through(normal: &Point<T>, anchor: &Point<T>) -> Self {
        Self {
            a: normal.x().clone(),
            b: normal.y().clone(),
            c: normal.dot(anchor),
        }
    }

    // Signed slack: <= 0 inside.
    fn eval(&self, p: &Point<T>) -> T {
        self.a.clone() * p.x().clone() + self.b.clone() * p.y().clone() - self.c.clone()
    }
}

/// Supporting half-planes whose intersection is exactly `h`.
fn half_planes<T: Scalar>(h: &Polytope<T>) -> Vec<HalfPlane<T>> {
    let v = h.vertices();
    match v.len() {
        0 => Vec::new(),
        1 => {
            let e1 = Point::new(vec![T::one(), T::zero()]);
            let e2 = Point::new(vec![T::zero(), T::one()]);
            let neg = |p: &Point<T>| p.scale(&-T::one());
            vec![
                HalfPlane::through(&e1, &v[0]),
                HalfPlane::through(&neg(&e1), &v[0]),
                HalfPlane::through(&e2, &v[0]),
                HalfPlane::through(&neg(&e2), &v[0]),
            ]
        }
        2 => {
            let dir = &v[1] - &v[0];
            let normal = Point::new(vec![dir.y().clone(), -dir.x().clone()]);
            let back = dir.scale(&-T::one());
            let anti = normal.scale(&-T::one());
            vec![
                HalfPlane::through(&normal, &v[0]),
                HalfPlane::through(&anti, &v[0]),
                HalfPlane::through(&dir, &v[1]),
                HalfPlane::through(&back, &v[0]),
            ]
        }
        m => (0..m)
            .map(|i| {
                let a = &v[i];
                let dir = &v[(i + 1) % m] - a;
                // Interior lies to the left of each CCW edge.
                let normal = Point::new(vec![dir.y().clone(), -dir.x().clone()]);
                HalfPlane::through(&normal, a)
            })
            .collect(),
    }
}

/// Sutherland-Hodgman step against one half-plane. Works on degenerate
/// vertex lists (one or two points) as well.
fn clip<T: Scalar>(poly: &[Point<T>], hp: &HalfPlane<T>) -> Vec<Point<T>> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let p = &poly[i];
        let q = &poly[(i + 1) % m];
        let vp = hp.eval(p);
        let vq = hp.eval(q);
        if vp <= T::zero() {
            out.push(p.clone());
        }
        if (vp < T::zero() && vq > T::zero()) || (vp > T::zero() && vq < T::zero()) {
            let t = vp.clone() / (vp - vq);
            let step = (q - p).scale(&t);
            out.push(p + &step);
        }
    }
    out
}

/// Exact set intersection of a non-empty list of polytopes.
pub fn intersect<T: Scalar>(polytopes: &[Polytope<T>]) -> Result<Polytope<T>> {
    let first = polytopes.first().ok_or(GeometryError::NoOperands)?;
    let d = first.dim();
    check_dimension(d)?;
    for h in polytopes {
        check_same(d, h.dim())?;
    }
    if polytopes.iter().any(Polytope::is_empty) {
        return Ok(Polytope::empty(d));
    }
    if d == 1 {
        let mut lo = first.vertices()[0].x().clone();
        let mut hi = first.vertices()[first.vertices().len() - 1].x().clone();
        for h in &polytopes[1..] {
            let v = h.vertices();
            lo = max_of(lo, v[0].x().clone());
            hi = min_of(hi, v[v.len() - 1].x().clone());
        }
        if lo > hi {
            return Ok(Polytope::empty(1));
        }
        return Ok(Polytope::interval(lo, hi));
    }
    let mut current = first.vertices().to_vec();
    for h in &polytopes[1..] {
        for hp in half_planes(h) {
            current = clip(&current, &hp);
            if current.is_empty() {
                return Ok(Polytope::empty(2));
            }
        }
        current = hull_unchecked(2, current).vertices().to_vec();
    }
    Ok(hull_unchecked(2, current))
}
