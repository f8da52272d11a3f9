//! The averaging protocol run by every node.
//!
//! Round `-1` exchanges inputs through reliable broadcast and the stable
//! vector. Round `0` reports the stable-vector set and computes a safe area.
//! Every later round reports the previous state with the set it was computed
//! from, so receivers can recompute and check it before averaging.

mod functions;
mod node;
mod params;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::rbcast::{NodeId, Round};

pub use functions::{add, function_h, proceed, verify};
pub use node::{NodeEvent, NodeState, VerifyCache};
pub use params::{Params, ParamsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("message set has the wrong kind for round {round}")]
    WrongSetKind { round: Round },
}

/// `verifier` accepted `subject`'s report for `round + 1`, adding
/// `(h, subject, round)` to its `R[round + 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VerifiedTag {
    pub subject: NodeId,
    pub round: Round,
    pub verifier: NodeId,
}
