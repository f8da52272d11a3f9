use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AdversaryStrategy, SchedulerPolicy};
use crate::protocol::{Params, ParamsError};
use crate::rbcast::NodeId;
use crate::Point;

/// Everything that determines one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionConfig {
    pub params: Params,
    /// `inputs[i]` is the input of node `i + 1`.
    pub inputs: Vec<Point>,
    #[serde(default)]
    pub faulty: BTreeMap<NodeId, AdversaryStrategy>,
    #[serde(default)]
    pub scheduler: SchedulerPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("expected {expected} inputs, got {found}")]
    InputCount { expected: usize, found: usize },
    #[error("input of node {node} has dimension {found}, expected {expected}")]
    InputDimension {
        node: NodeId,
        expected: usize,
        found: usize,
    },
    #[error("input of node {0} lies outside [lower, upper]^d")]
    InputRange(NodeId),
    #[error("{count} faulty nodes configured but f = {f}")]
    TooManyFaulty { count: usize, f: usize },
    #[error("faulty node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("strategy of node {node}: {reason}")]
    Strategy { node: NodeId, reason: String },
    #[error("malformed config: {0}")]
    Parse(String),
}

impl ExecutionConfig {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        p.validate()?;
        if self.inputs.len() != p.n {
            return Err(ConfigError::InputCount {
                expected: p.n,
                found: self.inputs.len(),
            });
        }
        for (i, x) in self.inputs.iter().enumerate() {
            let node = NodeId::from_index(i);
            if x.dim() != p.d {
                return Err(ConfigError::InputDimension {
                    node,
                    expected: p.d,
                    found: x.dim(),
                });
            }
            // Faulty inputs are held to the same box; see the README.
            if x.coords().iter().any(|c| *c < p.lower || *c > p.upper) {
                return Err(ConfigError::InputRange(node));
            }
        }
        if self.faulty.len() > p.f {
            return Err(ConfigError::TooManyFaulty {
                count: self.faulty.len(),
                f: p.f,
            });
        }
        for (node, s) in &self.faulty {
            if node.0 == 0 || node.0 as usize > p.n {
                return Err(ConfigError::UnknownNode(*node));
            }
            s.validate().map_err(|reason| ConfigError::Strategy {
                node: *node,
                reason,
            })?;
        }
        Ok(())
    }

    pub fn faulty_set(&self) -> BTreeSet<NodeId> {
        self.faulty.keys().copied().collect()
    }

    pub fn fault_free(&self) -> Vec<NodeId> {
        NodeId::all(self.params.n)
            .filter(|k| !self.faulty.contains_key(k))
            .collect()
    }

    pub fn input(&self, k: NodeId) -> &Point {
        &self.inputs[k.index()]
    }
}
