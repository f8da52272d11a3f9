use std::cmp::Ordering;

use super::point::{cross_vec, Point};
use super::polytope::{hull_unchecked, Polytope};
use super::{check_dimension, check_same, GeometryError, Result};
use crate::scalar::{is_unit_interval, Scalar};

/// Convex weights: each in `[0, 1]`, summing to exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector<T> {
    weights: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !is_unit_interval(*w)) {
            return Err(GeometryError::WeightMismatch(format!(
                "weight {w:?} outside [0, 1]"
            )));
        }
        let total = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        if total != T::one() {
            return Err(GeometryError::WeightMismatch(format!(
                "weights sum to {total:?}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// `m` equal weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(GeometryError::WeightMismatch("no weights".into()));
        }
        let w = T::one() / T::from_usize(m).expect("weight count fits the scalar");
        Ok(Self {
            weights: vec![w; m],
        })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Weighted Minkowski combination `sum c_i h_i` over the non-zero weights.
///
/// Zero-weight operands are skipped entirely, so they may be empty.
pub fn linear_combination<T: Scalar>(
    polytopes: &[Polytope<T>],
    weights: &WeightVector<T>,
) -> Result<Polytope<T>> {
    if polytopes.len() != weights.len() {
        return Err(GeometryError::WeightMismatch(format!(
            "{} polytopes but {} weights",
            polytopes.len(),
            weights.len()
        )));
    }
    let mut acc: Option<Polytope<T>> = None;
    for (i, (h, c)) in polytopes.iter().zip(weights.as_slice()).enumerate() {
        if c.is_zero() {
            continue;
        }
        if h.is_empty() {
            return Err(GeometryError::EmptyOperand(i));
        }
        check_dimension(h.dim())?;
        let scaled = h.scale(c);
        acc = Some(match acc {
            None => scaled,
            Some(a) => {
                check_same(a.dim(), h.dim())?;
                minkowski_sum(&a, &scaled)
            }
        });
    }
    // Weights sum to one, so at least one is non-zero.
    Ok(acc.expect("a stochastic weight vector has a non-zero entry"))
}

/// Minkowski sum of two non-empty canonical polytopes of equal dimension.
pub(crate) fn minkowski_sum<T: Scalar>(a: &Polytope<T>, b: &Polytope<T>) -> Polytope<T> {
    if a.dim() == 1 {
        let va = a.vertices();
        let vb = b.vertices();
        let lo = &va[0] + &vb[0];
        let hi = &va[va.len() - 1] + &vb[vb.len() - 1];
        return hull_unchecked(1, vec![lo, hi]);
    }
    let ea = edges(a.vertices());
    let eb = edges(b.vertices());
    let start = &a.vertices()[0] + &b.vertices()[0];
    let mut out = Vec::with_capacity(ea.len() + eb.len() + 1);
    let mut cur = start;
    out.push(cur.clone());
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        let step = if i == ea.len() {
            j += 1;
            eb[j - 1].clone()
        } else if j == eb.len() {
            i += 1;
            ea[i - 1].clone()
        } else {
            match angle_cmp(&ea[i], &eb[j]) {
                Ordering::Less => {
                    i += 1;
                    ea[i - 1].clone()
                }
                Ordering::Greater => {
                    j += 1;
                    eb[j - 1].clone()
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    &ea[i - 1] + &eb[j - 1]
                }
            }
        };
        cur = &cur + &step;
        out.push(cur.clone());
    }
    // The walk closes on the start vertex.
    if out.len() > 1 {
        out.pop();
    }
    Polytope::from_canonical(2, out)
}

fn edges<T: Scalar>(v: &[Point<T>]) -> Vec<Point<T>> {
    if v.len() < 2 {
        return Vec::new();
    }
    (0..v.len())
        .map(|i| &v[(i + 1) % v.len()] - &v[i])
        .collect()
}

// Polar angle order starting just past straight down, matching the edge
// sequence of a CCW polygon walked from its lexicographic minimum.
fn half<T: Scalar>(e: &Point<T>) -> u8 {
    if *e.x() > T::zero() || (e.x().is_zero() && *e.y() > T::zero()) {
        0
    } else {
        1
    }
}

fn angle_cmp<T: Scalar>(a: &Point<T>, b: &Point<T>) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| {
        let c = cross_vec(a, b);
        if c > T::zero() {
            Ordering::Less
        } else if c < T::zero() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}
