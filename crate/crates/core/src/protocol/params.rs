use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rbcast::Round;
use crate::scalar::{format_rational, rational_ratio, Rational};

/// Public protocol parameters, known to every node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub f: usize,
    pub d: usize,
    #[serde(with = "crate::codec::rational")]
    pub epsilon: Rational,
    /// Upper bound `U` on every input coordinate.
    #[serde(with = "crate::codec::rational")]
    pub upper: Rational,
    /// Lower bound `mu` on every input coordinate.
    #[serde(with = "crate::codec::rational")]
    pub lower: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("n = {n} is below (d + 2) f + 1 = {needed}")]
    TooFewNodes { n: usize, needed: usize },
    #[error("need at least two nodes")]
    SingleNode,
    #[error("dimension {0} is not supported")]
    Dimension(usize),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(String),
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    Bounds { lower: String, upper: String },
}

impl Params {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.d != 1 && self.d != 2 {
            return Err(ParamsError::Dimension(self.d));
        }
        if self.n < 2 {
            return Err(ParamsError::SingleNode);
        }
        let needed = (self.d + 2) * self.f + 1;
        if self.n < needed {
            return Err(ParamsError::TooFewNodes { n: self.n, needed });
        }
        if !self.epsilon.is_positive() {
            return Err(ParamsError::Epsilon(format_rational(&self.epsilon)));
        }
        if self.lower > self.upper {
            return Err(ParamsError::Bounds {
                lower: format_rational(&self.lower),
                upper: format_rational(&self.upper),
            });
        }
        Ok(())
    }

    /// Contraction rate `1 - 1/n`.
    pub fn alpha(&self) -> Rational {
        rational_ratio(self.n as i64 - 1, self.n as i64)
    }

    /// `d n^2 max(U^2, mu^2)`, the square of the initial spread bound.
    pub fn spread_bound_sq(&self) -> Rational {
        let u2 = &self.upper * &self.upper;
        let m2 = &self.lower * &self.lower;
        let mag = if u2 > m2 { u2 } else { m2 };
        let n = Rational::from_integer((self.n as i64).into());
        let d = Rational::from_integer((self.d as i64).into());
        d * &n * &n * mag
    }

    /// Smallest `t >= 1` with `alpha^t sqrt(spread) < epsilon`, compared as
    /// `alpha^(2t) spread < epsilon^2`.
    pub fn t_end(&self) -> Round {
        let a2 = self.alpha() * self.alpha();
        let eps2 = &self.epsilon * &self.epsilon;
        let mut bound = self.spread_bound_sq() * &a2;
        let mut t: Round = 1;
        // alpha < 1, and with n = 1 rejected, a2 is strictly below one.
        debug_assert!(a2 < Rational::one());
        while bound >= eps2 {
            if bound.is_zero() {
                break;
            }
            bound *= &a2;
            t += 1;
        }
        t
    }
}
