use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::rbcast::{
    InputSet, MessageSet, MessageValue, NodeId, Round, SignedMessage, PRELIMINARY,
};
use crate::{Point, Polytope};

use super::functions::{add, function_h, proceed, verify};
use super::{Params, ProtocolError};

/// Something a node did while handling one event, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeEvent {
    /// The node asks reliable broadcast to send `value` with tag `round`.
    Broadcast {
        round: Round,
        value: MessageValue,
    },
    Verified {
        sender: NodeId,
        round: Round,
        ok: bool,
    },
    /// `R[round]` gained the entry for `sender`.
    Added {
        sender: NodeId,
        round: Round,
    },
    /// `R^c[round]` was fixed.
    Frozen {
        round: Round,
        set: MessageSet,
    },
    Computed {
        round: Round,
        h: Polytope,
    },
    Advanced {
        round: Round,
    },
    Decided {
        h: Polytope,
    },
    /// Not processable by any handler: wrong payload shape or a round past
    /// the last one.
    Dropped {
        sender: NodeId,
        round: Round,
    },
}

/// Memo for the verification checks, shared by all nodes of one run.
///
/// The checks are a pure function of the message, and reliable broadcast
/// delivers the same message to everyone, so each is evaluated once.
#[derive(Debug, Default)]
pub struct VerifyCache {
    memo: HashMap<SignedMessage, bool>,
}

impl VerifyCache {
    pub fn check(&mut self, params: &Params, msg: &SignedMessage) -> bool {
        if let Some(&ok) = self.memo.get(msg) {
            return ok;
        }
        let ok = match &msg.value {
            MessageValue::Report { h, set } => verify(params, h, set, msg.sender, msg.round),
            MessageValue::Input { .. } => false,
        };
        self.memo.insert(msg.clone(), ok);
        ok
    }
}

/// One node's protocol state. Every handler runs to completion, which makes
/// the critical sections of the algorithm atomic by construction.
#[derive(Debug, Clone)]
pub struct NodeState {
    id: NodeId,
    params: Params,
    t_end: Round,
    input: Point,
    round: Round,
    h: BTreeMap<Round, Polytope>,
    r: BTreeMap<Round, MessageSet>,
    rc: BTreeMap<Round, MessageSet>,
    parked: VecDeque<SignedMessage>,
    output: Option<Polytope>,
}

impl NodeState {
    pub fn new(id: NodeId, params: Params, input: Point) -> Self {
        let t_end = params.t_end();
        Self {
            id,
            params,
            t_end,
            input,
            round: PRELIMINARY,
            h: BTreeMap::new(),
            r: BTreeMap::new(),
            rc: BTreeMap::new(),
            parked: VecDeque::new(),
            output: None,
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn t_end(&self) -> Round {
        self.t_end
    }

    pub fn input(&self) -> &Point {
        &self.input
    }

    /// Current round; `t_end + 1` once decided.
    pub fn round(&self) -> Round {
        self.round
    }

    pub fn h(&self, t: Round) -> Option<&Polytope> {
        self.h.get(&t)
    }

    pub fn r(&self, t: Round) -> Option<&MessageSet> {
        self.r.get(&t)
    }

    pub fn rc(&self, t: Round) -> Option<&MessageSet> {
        self.rc.get(&t)
    }

    pub fn output(&self) -> Option<&Polytope> {
        self.output.as_ref()
    }

    pub fn parked(&self) -> impl Iterator<Item = &SignedMessage> {
        self.parked.iter()
    }

    pub fn sv_returned(&self) -> bool {
        self.rc.contains_key(&PRELIMINARY)
    }

    /// Round `-1` start: broadcast the input.
    pub fn on_start(&self) -> Vec<NodeEvent> {
        vec![NodeEvent::Broadcast {
            round: PRELIMINARY,
            value: MessageValue::Input {
                point: self.input.clone(),
            },
        }]
    }

    /// The stable-vector call returned `msgs`.
    pub fn on_sv_return(
        &mut self,
        msgs: &[SignedMessage],
        cache: &mut VerifyCache,
    ) -> Result<Vec<NodeEvent>, ProtocolError> {
        let mut set: InputSet = match self.r.remove(&PRELIMINARY) {
            Some(MessageSet::Inputs(m)) => m,
            _ => InputSet::new(),
        };
        for m in msgs {
            if let (PRELIMINARY, MessageValue::Input { point }) = (m.round, &m.value) {
                if point.dim() == self.params.d {
                    set.entry(m.sender).or_insert_with(|| point.clone());
                }
            }
        }
        let set = MessageSet::Inputs(set);
        self.r.insert(PRELIMINARY, set.clone());
        self.rc.insert(PRELIMINARY, set.clone());
        let empty = Polytope::empty(self.params.d);
        self.h.insert(PRELIMINARY, empty.clone());
        self.round = 0;
        let mut out = vec![
            NodeEvent::Frozen {
                round: PRELIMINARY,
                set: set.clone(),
            },
            NodeEvent::Advanced { round: 0 },
            NodeEvent::Broadcast {
                round: 0,
                value: MessageValue::Report { h: empty, set },
            },
        ];
        self.drain_parked(cache, &mut out)?;
        Ok(out)
    }

    /// A reliable-broadcast delivery.
    pub fn on_receive(
        &mut self,
        msg: SignedMessage,
        cache: &mut VerifyCache,
    ) -> Result<Vec<NodeEvent>, ProtocolError> {
        let mut out = Vec::new();
        let dropped = NodeEvent::Dropped {
            sender: msg.sender,
            round: msg.round,
        };
        match (&msg.value, msg.round) {
            (MessageValue::Input { point }, PRELIMINARY) if point.dim() == self.params.d => {
                let r = self
                    .r
                    .entry(PRELIMINARY)
                    .or_insert_with(|| MessageSet::empty_for(PRELIMINARY));
                if let MessageSet::Inputs(m) = r {
                    if let std::collections::btree_map::Entry::Vacant(e) = m.entry(msg.sender) {
                        e.insert(point.clone());
                        out.push(NodeEvent::Added {
                            sender: msg.sender,
                            round: PRELIMINARY,
                        });
                    }
                }
            }
            (MessageValue::Report { .. }, t) if (0..=self.t_end).contains(&t) => {
                self.parked.push_back(msg);
            }
            _ => {
                out.push(dropped);
                return Ok(out);
            }
        }
        self.drain_parked(cache, &mut out)?;
        Ok(out)
    }

    /// Processes parked reports whose wait condition holds, earliest first,
    /// until none is left that can move.
    fn drain_parked(
        &mut self,
        cache: &mut VerifyCache,
        out: &mut Vec<NodeEvent>,
    ) -> Result<(), ProtocolError> {
        while let Some(pos) = self.parked.iter().position(|m| self.ready(m)) {
            let msg = self.parked.remove(pos).expect("position is in range");
            self.process(&msg, cache, out)?;
        }
        Ok(())
    }

    fn ready(&self, m: &SignedMessage) -> bool {
        if m.round > self.round {
            return false;
        }
        let MessageValue::Report { set, .. } = &m.value else {
            return false;
        };
        self.r
            .get(&(m.round - 1))
            .is_some_and(|r| set.is_subset_of(r))
    }

    fn process(
        &mut self,
        msg: &SignedMessage,
        cache: &mut VerifyCache,
        out: &mut Vec<NodeEvent>,
    ) -> Result<(), ProtocolError> {
        let t = msg.round;
        let MessageValue::Report { h, set } = &msg.value else {
            return Ok(());
        };
        let ok = cache.check(&self.params, msg);
        out.push(NodeEvent::Verified {
            sender: msg.sender,
            round: t,
            ok,
        });
        if ok {
            let r = self.r.entry(t).or_insert_with(|| MessageSet::empty_for(t));
            let before = r.len();
            *r = add(r, h, set, msg.sender, t);
            if r.len() > before {
                out.push(NodeEvent::Added {
                    sender: msg.sender,
                    round: t,
                });
            }
        }
        self.try_proceed(t, out)
    }

    fn try_proceed(&mut self, t: Round, out: &mut Vec<NodeEvent>) -> Result<(), ProtocolError> {
        if t != self.round || self.rc.contains_key(&t) {
            return Ok(());
        }
        let Some(r) = self.r.get(&t) else {
            return Ok(());
        };
        if !proceed(&self.params, t, r, self.id, self.h.get(&(t - 1))) {
            return Ok(());
        }
        let frozen = r.clone();
        let h = function_h(&frozen, t, self.params.f, self.params.d)?;
        self.rc.insert(t, frozen.clone());
        self.h.insert(t, h.clone());
        out.push(NodeEvent::Frozen {
            round: t,
            set: frozen.clone(),
        });
        out.push(NodeEvent::Computed {
            round: t,
            h: h.clone(),
        });
        self.round = t + 1;
        if t == self.t_end {
            self.output = Some(h.clone());
            out.push(NodeEvent::Decided { h });
        } else {
            out.push(NodeEvent::Advanced { round: t + 1 });
            out.push(NodeEvent::Broadcast {
                round: t + 1,
                value: MessageValue::Report { h, set: frozen },
            });
        }
        Ok(())
    }
}
