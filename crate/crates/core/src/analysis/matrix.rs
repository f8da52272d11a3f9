use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::geometry::{linear_combination, WeightVector};
use crate::rbcast::{MessageSet, NodeId, Round};
use crate::scalar::{format_rational, Rational};
use crate::Polytope;

use super::{AnalysisError, TraceView};

/// Square matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: Vec<Vec<Rational>>,
}

/// `M[t]` reconstructed from a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub round: Round,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ergodicity {
    #[serde(serialize_with = "ser_rational")]
    pub delta: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
}

fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

impl Matrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        Self { rows }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    /// `self * other`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .filter(|&k| !self.rows[i][k].is_zero())
                            .fold(Rational::zero(), |acc, k| {
                                acc + &self.rows[i][k] * &other.rows[k][j]
                            })
                    })
                    .collect()
            })
            .collect();
        Matrix { rows }
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.rows.iter().all(|r| {
            r.len() == self.n()
                && r.iter().all(|x| !x.is_negative())
                && r.iter().fold(Rational::zero(), |a, x| a + x) == Rational::one()
        })
    }

    /// Coefficients of ergodicity.
    pub fn ergodicity(&self) -> Result<Ergodicity, AnalysisError> {
        if !self.is_row_stochastic() {
            return Err(AnalysisError::NotStochastic);
        }
        let n = self.n();
        let mut delta = Rational::zero();
        let mut overlap_min: Option<Rational> = None;
        for a in 0..n {
            for b in 0..n {
                let mut overlap = Rational::zero();
                for j in 0..n {
                    let (x, y) = (&self.rows[a][j], &self.rows[b][j]);
                    let diff = (x - y).abs();
                    if diff > delta {
                        delta = diff;
                    }
                    overlap += if x < y { x } else { y };
                }
                if overlap_min.as_ref().is_none_or(|m| overlap < *m) {
                    overlap_min = Some(overlap);
                }
            }
        }
        let lambda = Rational::one() - overlap_min.unwrap_or_else(Rational::one);
        Ok(Ergodicity { delta, lambda })
    }
}

/// Builds `M[t]`, `t >= 1`.
///
/// A row of a node accounted for in round `t` puts `1/|R^c_i[t]|` on each
/// sender in `R^c_i[t]`; a row of an unverified faulty node is uniform.
pub fn build_matrix(view: &TraceView, t: Round) -> Result<TransitionMatrix, AnalysisError> {
    let n = view.n();
    let unverified = view.unverified(t);
    let uniform = Rational::new(1.into(), (n as i64).into());
    let mut rows = Vec::with_capacity(n);
    for i in NodeId::all(n) {
        if unverified.contains(&i) {
            rows.push(vec![uniform.clone(); n]);
            continue;
        }
        let (_, rc) = view.state(i, t)?;
        let MessageSet::States(entries) = rc else {
            return Err(AnalysisError::IncompleteTrace(format!(
                "R^c of node {i} in round {t} is not a state set"
            )));
        };
        let w = Rational::new(1.into(), (entries.len() as i64).into());
        rows.push(
            NodeId::all(n)
                .map(|k| {
                    if entries.contains_key(&k) {
                        w.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        );
    }
    Ok(TransitionMatrix {
        round: t,
        matrix: Matrix { rows },
    })
}

/// Row-by-row weighted combination of a polytope vector.
pub fn matrix_apply(m: &Matrix, v: &[Polytope]) -> Result<Vec<Polytope>, AnalysisError> {
    if v.len() != m.n() {
        return Err(AnalysisError::IncompleteTrace(format!(
            "vector of length {} against a {}x{} matrix",
            v.len(),
            m.n(),
            m.n()
        )));
    }
    (0..m.n())
        .map(|i| {
            let w = WeightVector::new(m.row(i).to_vec())?;
            Ok(linear_combination(v, &w)?)
        })
        .collect()
}
