use std::collections::{BTreeMap, BTreeSet};

use crate::adversary::AdversaryStrategy;
use crate::protocol::{Params, VerifiedTag};
use crate::rbcast::{DeliveryPlan, MessageId, MessageSet, MessageValue, NodeId, Round};
use crate::sim::{ExecutionTrace, TraceEvent};
use crate::{Point, Polytope};

use super::AnalysisError;

#[derive(Debug, Clone)]
pub struct SendRecord {
    pub sender: NodeId,
    pub round: Round,
    pub value: MessageValue,
    pub plan: DeliveryPlan,
}

/// Indexed contents of a trace.
///
/// Per-node `R^c` and `h` values are recorded for every node, but only the
/// fault-free ones are taken at face value. A verified faulty node's state
/// is read off the report that earned its verification.
#[derive(Debug, Clone)]
pub struct TraceView {
    pub params: Params,
    pub t_end: Round,
    pub inputs: Vec<Point>,
    pub faulty: BTreeSet<NodeId>,
    pub strategies: BTreeMap<NodeId, AdversaryStrategy>,
    pub fault_free: Vec<NodeId>,
    pub rc: BTreeMap<(NodeId, Round), MessageSet>,
    pub h: BTreeMap<(NodeId, Round), Polytope>,
    pub sends: BTreeMap<MessageId, SendRecord>,
    pub send_index: BTreeMap<(NodeId, Round), MessageId>,
    /// Tags from fault-free verifiers, including round `-1` for accepted
    /// round-0 reports.
    pub tags: BTreeSet<VerifiedTag>,
    pub decisions: BTreeMap<NodeId, (Round, Polytope)>,
    pub sv: BTreeMap<NodeId, Vec<MessageId>>,
    /// `(receiver, message)` pairs handed over by delivery, suppression, or
    /// stable vector.
    pub received: BTreeSet<(NodeId, MessageId)>,
    pub refused: usize,
}

impl TraceView {
    pub fn new(trace: &ExecutionTrace) -> Self {
        let cfg = &trace.header.config;
        let faulty = cfg.faulty_set();
        let mut v = TraceView {
            params: cfg.params.clone(),
            t_end: trace.header.t_end,
            inputs: cfg.inputs.clone(),
            fault_free: cfg.fault_free(),
            faulty,
            strategies: cfg.faulty.clone(),
            rc: BTreeMap::new(),
            h: BTreeMap::new(),
            sends: BTreeMap::new(),
            send_index: BTreeMap::new(),
            tags: BTreeSet::new(),
            decisions: BTreeMap::new(),
            sv: BTreeMap::new(),
            received: BTreeSet::new(),
            refused: 0,
        };
        for e in trace.events() {
            match e {
                TraceEvent::RbSend {
                    sender,
                    round,
                    id,
                    value,
                    plan,
                } => {
                    v.sends.insert(
                        *id,
                        SendRecord {
                            sender: *sender,
                            round: *round,
                            value: value.clone(),
                            plan: *plan,
                        },
                    );
                    v.send_index.insert((*sender, *round), *id);
                }
                TraceEvent::RbRefused { .. } => v.refused += 1,
                TraceEvent::SvReturn { node, messages } => {
                    for id in messages {
                        v.received.insert((*node, *id));
                    }
                    v.sv.insert(*node, messages.clone());
                }
                TraceEvent::Delivery { receiver, id, .. }
                | TraceEvent::Suppression { receiver, id, .. } => {
                    v.received.insert((*receiver, *id));
                }
                TraceEvent::Verify {
                    node,
                    sender,
                    round,
                    ok: true,
                } if !v.faulty.contains(node) => {
                    v.tags.insert(VerifiedTag {
                        subject: *sender,
                        round: round - 1,
                        verifier: *node,
                    });
                }
                TraceEvent::RcFreeze { node, round, set } => {
                    v.rc.insert((*node, *round), set.clone());
                }
                TraceEvent::HCompute { node, round, h } => {
                    v.h.insert((*node, *round), h.clone());
                }
                TraceEvent::Decide { node, t_end, h } => {
                    v.decisions.insert(*node, (*t_end, h.clone()));
                }
                _ => {}
            }
        }
        v
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn is_fault_free(&self, k: NodeId) -> bool {
        !self.faulty.contains(&k)
    }

    /// Faulty nodes whose round `r` execution no fault-free node verified.
    pub fn unverified(&self, r: Round) -> BTreeSet<NodeId> {
        self.faulty
            .iter()
            .copied()
            .filter(|&k| !self.is_verified(k, r))
            .collect()
    }

    pub fn is_verified(&self, k: NodeId, r: Round) -> bool {
        self.tags
            .range(
                VerifiedTag {
                    subject: k,
                    round: r,
                    verifier: NodeId(0),
                }..=VerifiedTag {
                    subject: k,
                    round: r,
                    verifier: NodeId(u32::MAX),
                },
            )
            .next()
            .is_some()
    }

    /// Nodes outside the unverified set of round `r`.
    pub fn accounted(&self, r: Round) -> Vec<NodeId> {
        let out = self.unverified(r);
        NodeId::all(self.n()).filter(|k| !out.contains(k)).collect()
    }

    fn report(&self, k: NodeId, round: Round) -> Option<(&Polytope, &MessageSet)> {
        let id = self.send_index.get(&(k, round))?;
        match &self.sends[id].value {
            MessageValue::Report { h, set } => Some((h, set)),
            MessageValue::Input { .. } => None,
        }
    }

    /// `(h_k[r], R^c_k[r])` for a node outside the round-`r` unverified set.
    pub fn state(&self, k: NodeId, r: Round) -> Result<(&Polytope, &MessageSet), AnalysisError> {
        let missing =
            || AnalysisError::IncompleteTrace(format!("no state for node {k} in round {r}"));
        if self.is_fault_free(k) {
            let h = self.h.get(&(k, r)).ok_or_else(missing)?;
            let rc = self.rc.get(&(k, r)).ok_or_else(missing)?;
            Ok((h, rc))
        } else if self.is_verified(k, r) {
            self.report(k, r + 1).ok_or_else(missing)
        } else {
            Err(missing())
        }
    }

    /// Every traced `h_i[t]` of fault-free nodes.
    pub fn fault_free_states(&self) -> impl Iterator<Item = (NodeId, Round, &Polytope)> {
        self.h
            .iter()
            .filter(|((k, _), _)| self.is_fault_free(*k))
            .map(|((k, t), h)| (*k, *t, h))
    }
}
