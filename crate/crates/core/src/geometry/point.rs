use std::cmp::Ordering;
use std::ops::{Add, Sub};

use crate::scalar::Scalar;

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn origin(d: usize) -> Self {
        Self {
            coords: vec![T::zero(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn x(&self) -> &T {
        &self.coords[0]
    }

    pub fn y(&self) -> &T {
        &self.coords[1]
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            coords: self.coords.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    /// Lexicographic order on coordinates. Total for exact scalars.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.partial_cmp(b) {
                Some(Ordering::Equal) => continue,
                Some(o) => return o,
                None => return Ordering::Equal,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(crate::scalar::to_f64).collect()
    }
}

impl<T: Scalar> Add for &Point<T> {
    type Output = Point<T>;

    fn add(self, rhs: &Point<T>) -> Point<T> {
        Point {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &Point<T> {
    type Output = Point<T>;

    fn sub(self, rhs: &Point<T>) -> Point<T> {
        Point {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

/// Twice the signed area of triangle `(o, a, b)`; positive for a left turn.
pub(crate) fn cross<T: Scalar>(o: &Point<T>, a: &Point<T>, b: &Point<T>) -> T {
    let ax = a.coords[0].clone() - o.coords[0].clone();
    let ay = a.coords[1].clone() - o.coords[1].clone();
    let bx = b.coords[0].clone() - o.coords[0].clone();
    let by = b.coords[1].clone() - o.coords[1].clone();
    ax * by - ay * bx
}

pub(crate) fn cross_vec<T: Scalar>(a: &Point<T>, b: &Point<T>) -> T {
    a.coords[0].clone() * b.coords[1].clone() - a.coords[1].clone() * b.coords[0].clone()
}
