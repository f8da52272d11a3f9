//! Reliable broadcast and stable vector, simulated by their guarantees.
//!
//! The ledger is the only path by which a value moves between nodes, so the
//! primitive properties hold by construction:
//!
//! * one registered value per `(sender, round)` (global uniqueness; a second
//!   `rb_send` is refused);
//! * a registered message is queued for every node or for none
//!   (global liveness), and a fault-free sender's message is always queued
//!   (fault-free liveness);
//! * only the sender can register under its own id (integrity);
//! * stable-vector sets are prefixes of one global order, so they are nested.
//!
//! Channels are FIFO per `(sender, receiver)` pair. Round `-1` deliveries to
//! a node stay blocked until its stable-vector call has returned; deliveries
//! covered by the returned set are then suppressed as duplicates.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Point, Polytope};

/// Node identifier, `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(i as u32 + 1)
    }

    pub fn all(n: usize) -> impl Iterator<Item = NodeId> {
        (1..=n as u32).map(NodeId)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Round index; `-1` is the preliminary round.
pub type Round = i64;

pub const PRELIMINARY: Round = -1;

/// Round `-1` messages `(x, k, -1)` keyed by `k`.
pub type InputSet = BTreeMap<NodeId, Point>;
/// Round `0` entries `(V, j, -1)` keyed by `j`.
pub type SnapshotSet = BTreeMap<NodeId, Snapshot>;
/// Round `t >= 1` entries `(h, j, t - 1)` keyed by `j`.
pub type StateSet = BTreeMap<NodeId, Polytope>;

/// A set of tagged tuples all carrying the same round index.
///
/// Reliable broadcast delivers at most one message per `(sender, round)`, so
/// every set a node builds is a function of the sender. A tuple set with two
/// entries for one sender could never be a subset of such a set; it is not
/// representable here and decoding rejects it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "entries", rename_all = "snake_case")]
pub enum MessageSet {
    Inputs(#[serde(with = "crate::codec::pairs")] InputSet),
    Snapshots(#[serde(with = "crate::codec::pairs")] SnapshotSet),
    States(#[serde(with = "crate::codec::pairs")] StateSet),
}

/// Newtype so snapshot maps nest with the pair encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Snapshot(#[serde(with = "crate::codec::pairs")] pub InputSet);

impl MessageSet {
    /// The empty set appropriate for entries of `round`'s `R` set.
    pub fn empty_for(round: Round) -> Self {
        match round {
            r if r < 0 => MessageSet::Inputs(BTreeMap::new()),
            0 => MessageSet::Snapshots(BTreeMap::new()),
            _ => MessageSet::States(BTreeMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MessageSet::Inputs(m) => m.len(),
            MessageSet::Snapshots(m) => m.len(),
            MessageSet::States(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn senders(&self) -> Vec<NodeId> {
        match self {
            MessageSet::Inputs(m) => m.keys().copied().collect(),
            MessageSet::Snapshots(m) => m.keys().copied().collect(),
            MessageSet::States(m) => m.keys().copied().collect(),
        }
    }

    pub fn contains_sender(&self, k: NodeId) -> bool {
        match self {
            MessageSet::Inputs(m) => m.contains_key(&k),
            MessageSet::Snapshots(m) => m.contains_key(&k),
            MessageSet::States(m) => m.contains_key(&k),
        }
    }

    /// Tuple-set inclusion. Sets of different kinds are never related.
    pub fn is_subset_of(&self, other: &MessageSet) -> bool {
        fn sub<V: PartialEq>(a: &BTreeMap<NodeId, V>, b: &BTreeMap<NodeId, V>) -> bool {
            a.iter().all(|(k, v)| b.get(k) == Some(v))
        }
        match (self, other) {
            (MessageSet::Inputs(a), MessageSet::Inputs(b)) => sub(a, b),
            (MessageSet::Snapshots(a), MessageSet::Snapshots(b)) => sub(a, b),
            (MessageSet::States(a), MessageSet::States(b)) => sub(a, b),
            _ => false,
        }
    }

    /// Removes the entry for `k`, if any.
    pub fn without(&self, k: NodeId) -> MessageSet {
        let mut out = self.clone();
        match &mut out {
            MessageSet::Inputs(m) => {
                m.remove(&k);
            }
            MessageSet::Snapshots(m) => {
                m.remove(&k);
            }
            MessageSet::States(m) => {
                m.remove(&k);
            }
        }
        out
    }

    /// Keeps the `count` smallest sender ids.
    pub fn truncated(&self, count: usize) -> MessageSet {
        fn keep<V: Clone>(m: &BTreeMap<NodeId, V>, count: usize) -> BTreeMap<NodeId, V> {
            m.iter().take(count).map(|(k, v)| (*k, v.clone())).collect()
        }
        match self {
            MessageSet::Inputs(m) => MessageSet::Inputs(keep(m, count)),
            MessageSet::Snapshots(m) => MessageSet::Snapshots(keep(m, count)),
            MessageSet::States(m) => MessageSet::States(keep(m, count)),
        }
    }

    /// Copies the entry for `k` from `other` when kinds agree and `k` is
    /// present there.
    pub fn with_entry_from(&self, other: &MessageSet, k: NodeId) -> MessageSet {
        let mut out = self.clone();
        match (&mut out, other) {
            (MessageSet::Inputs(a), MessageSet::Inputs(b)) => {
                if let Some(v) = b.get(&k) {
                    a.insert(k, v.clone());
                }
            }
            (MessageSet::Snapshots(a), MessageSet::Snapshots(b)) => {
                if let Some(v) = b.get(&k) {
                    a.insert(k, v.clone());
                }
            }
            (MessageSet::States(a), MessageSet::States(b)) => {
                if let Some(v) = b.get(&k) {
                    a.insert(k, v.clone());
                }
            }
            _ => {}
        }
        out
    }
}

/// Payload of a reliably broadcast message.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageValue {
    /// Round `-1`: the sender's input point.
    Input { point: Point },
    /// Round `t >= 0`: `(h[t-1], R^c[t-1])`.
    Report { h: Polytope, set: MessageSet },
}

/// The triple `(value, sender, round)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedMessage {
    pub sender: NodeId,
    pub round: Round,
    pub value: MessageValue,
}

/// How the adversary lets a registered message travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum DeliveryPlan {
    /// Queued to every node immediately.
    #[default]
    Normal,
    /// Queued to every node, but held back until `after` further deliveries
    /// have happened anywhere (or nothing else is left to do).
    Delayed { after: u64 },
    /// Never delivered to anyone. Only legal for faulty senders.
    Withheld,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RbError {
    #[error("node {sender} already broadcast in round {round}")]
    DuplicateBroadcast { sender: NodeId, round: Round },
    #[error("stable vector not ready: {registered} round -1 messages, need {needed}")]
    NotReady { registered: usize, needed: usize },
    #[error("no pending deliveries")]
    NoPendingDeliveries,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("fault-free node {0} cannot withhold a broadcast")]
    WithheldByFaultFree(NodeId),
    #[error("stable vector already returned to node {0}")]
    SvAlreadyReturned(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageId(pub usize);

#[derive(Debug, Clone)]
struct Pending {
    msg: MessageId,
    release_at: u64,
}

/// Outcome of popping one channel head.
#[derive(Debug, Clone)]
pub struct Delivery {
    pub receiver: NodeId,
    pub message: SignedMessage,
    pub id: MessageId,
    /// Already received this `(sender, round)`: the handler must not run.
    pub suppressed: bool,
}

/// A `(sender, receiver)` channel whose head may be delivered now.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Channel {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub head: MessageId,
}

#[derive(Debug, Clone)]
pub struct BroadcastLedger {
    n: usize,
    f: usize,
    faulty: BTreeSet<NodeId>,
    messages: Vec<SignedMessage>,
    plans: Vec<DeliveryPlan>,
    registered: BTreeMap<(NodeId, Round), MessageId>,
    channels: BTreeMap<(NodeId, NodeId), VecDeque<Pending>>,
    seen: BTreeSet<(NodeId, NodeId, Round)>,
    received: BTreeMap<NodeId, Vec<MessageId>>,
    sv_order: Option<Vec<MessageId>>,
    sv_returned: BTreeMap<NodeId, Vec<MessageId>>,
    deliveries: u64,
}

impl BroadcastLedger {
    pub fn new(n: usize, f: usize, faulty: BTreeSet<NodeId>) -> Self {
        Self {
            n,
            f,
            faulty,
            messages: Vec::new(),
            plans: Vec::new(),
            registered: BTreeMap::new(),
            channels: BTreeMap::new(),
            seen: BTreeSet::new(),
            received: BTreeMap::new(),
            sv_order: None,
            sv_returned: BTreeMap::new(),
            deliveries: 0,
        }
    }

    fn check_node(&self, k: NodeId) -> Result<(), RbError> {
        if k.0 >= 1 && (k.0 as usize) <= self.n {
            Ok(())
        } else {
            Err(RbError::UnknownNode(k))
        }
    }

    pub fn message(&self, id: MessageId) -> &SignedMessage {
        &self.messages[id.0]
    }

    pub fn messages(&self) -> &[SignedMessage] {
        &self.messages
    }

    pub fn plan(&self, id: MessageId) -> DeliveryPlan {
        self.plans[id.0]
    }

    pub fn lookup(&self, sender: NodeId, round: Round) -> Option<MessageId> {
        self.registered.get(&(sender, round)).copied()
    }

    /// Registers `(value, sender, round)` and queues its deliveries.
    pub fn rb_send(
        &mut self,
        sender: NodeId,
        round: Round,
        value: MessageValue,
        plan: DeliveryPlan,
    ) -> Result<MessageId, RbError> {
        self.check_node(sender)?;
        if self.registered.contains_key(&(sender, round)) {
            return Err(RbError::DuplicateBroadcast { sender, round });
        }
        if plan == DeliveryPlan::Withheld && !self.faulty.contains(&sender) {
            return Err(RbError::WithheldByFaultFree(sender));
        }
        let id = MessageId(self.messages.len());
        self.messages.push(SignedMessage {
            sender,
            round,
            value,
        });
        self.plans.push(plan);
        self.registered.insert((sender, round), id);
        let release_at = match plan {
            DeliveryPlan::Normal => 0,
            DeliveryPlan::Delayed { after } => self.deliveries + after,
            DeliveryPlan::Withheld => return Ok(id),
        };
        for receiver in NodeId::all(self.n) {
            self.channels
                .entry((sender, receiver))
                .or_default()
                .push_back(Pending {
                    msg: id,
                    release_at,
                });
        }
        Ok(id)
    }

    /// Registered round `-1` messages that could take part in the stable
    /// vector order, in registration order.
    pub fn sv_candidates(&self) -> Vec<MessageId> {
        self.registered
            .iter()
            .filter(|((_, r), id)| *r == PRELIMINARY && self.plans[id.0] != DeliveryPlan::Withheld)
            .map(|(_, id)| *id)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Fixes the single global order whose prefixes every `sv_recv` returns.
    /// Entries that are not registered round `-1` messages are dropped.
    pub fn fix_sv_order(&mut self, order: Vec<MessageId>) {
        let allowed: BTreeSet<MessageId> = self.sv_candidates().into_iter().collect();
        let mut seen = BTreeSet::new();
        let order = order
            .into_iter()
            .filter(|id| allowed.contains(id) && seen.insert(*id))
            .collect();
        self.sv_order = Some(order);
    }

    pub fn sv_order(&self) -> Option<&[MessageId]> {
        self.sv_order.as_deref()
    }

    /// Clamps a requested prefix length to `[n - f, |order|]`.
    pub fn sv_prefix_len(&self, requested: usize) -> Result<usize, RbError> {
        let available = self
            .sv_order
            .as_ref()
            .map(Vec::len)
            .unwrap_or_else(|| self.sv_candidates().len());
        let needed = self.n - self.f;
        if available < needed {
            return Err(RbError::NotReady {
                registered: available,
                needed,
            });
        }
        Ok(requested.clamp(needed, available))
    }

    /// Stable-vector return for `node`: a prefix of the global order of
    /// length at least `n - f`. If no order was fixed yet, registration
    /// order is used.
    pub fn sv_recv(
        &mut self,
        node: NodeId,
        requested: usize,
    ) -> Result<Vec<SignedMessage>, RbError> {
        self.check_node(node)?;
        if self.sv_returned.contains_key(&node) {
            return Err(RbError::SvAlreadyReturned(node));
        }
        let len = self.sv_prefix_len(requested)?;
        if self.sv_order.is_none() {
            let order = self.sv_candidates();
            self.sv_order = Some(order);
        }
        let prefix: Vec<MessageId> = self.sv_order.as_ref().expect("order fixed")[..len].to_vec();
        for id in &prefix {
            let m = &self.messages[id.0];
            self.seen.insert((node, m.sender, m.round));
        }
        self.received
            .entry(node)
            .or_default()
            .extend(prefix.iter().copied());
        let out = prefix
            .iter()
            .map(|id| self.messages[id.0].clone())
            .collect();
        self.sv_returned.insert(node, prefix);
        Ok(out)
    }

    pub fn sv_returned(&self) -> &BTreeMap<NodeId, Vec<MessageId>> {
        &self.sv_returned
    }

    /// Channels whose head can be delivered now.
    pub fn eligible(&self) -> Vec<Channel> {
        self.channels
            .iter()
            .filter_map(|(&(sender, receiver), q)| {
                let head = q.front()?;
                if head.release_at > self.deliveries {
                    return None;
                }
                if self.messages[head.msg.0].round == PRELIMINARY
                    && !self.sv_returned.contains_key(&receiver)
                {
                    return None;
                }
                Some(Channel {
                    sender,
                    receiver,
                    head: head.msg,
                })
            })
            .collect()
    }

    /// Releases every held-back delivery. Used when nothing else can move,
    /// so a delayed message is still delivered in finite time.
    pub fn release_delayed(&mut self) -> bool {
        let mut any = false;
        for q in self.channels.values_mut() {
            for p in q.iter_mut() {
                if p.release_at > 0 {
                    p.release_at = 0;
                    any = true;
                }
            }
        }
        any
    }

    pub fn pending_count(&self) -> usize {
        self.channels.values().map(VecDeque::len).sum()
    }

    /// Pops the head of `(sender, receiver)`.
    pub fn deliver(&mut self, sender: NodeId, receiver: NodeId) -> Result<Delivery, RbError> {
        let q = self
            .channels
            .get_mut(&(sender, receiver))
            .ok_or(RbError::NoPendingDeliveries)?;
        let p = q.pop_front().ok_or(RbError::NoPendingDeliveries)?;
        if q.is_empty() {
            self.channels.remove(&(sender, receiver));
        }
        self.deliveries += 1;
        let message = self.messages[p.msg.0].clone();
        let suppressed = !self.seen.insert((receiver, message.sender, message.round));
        if !suppressed {
            self.received.entry(receiver).or_default().push(p.msg);
        }
        Ok(Delivery {
            receiver,
            message,
            id: p.msg,
            suppressed,
        })
    }

    /// Message ids accepted by `node`, via stable vector or delivery.
    pub fn received_by(&self, node: NodeId) -> &[MessageId] {
        self.received.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Registered, non-withheld messages some node has not received.
    pub fn undelivered(&self) -> Vec<(MessageId, NodeId)> {
        let mut out = Vec::new();
        for (id, m) in self.messages.iter().enumerate() {
            if self.plans[id] == DeliveryPlan::Withheld {
                continue;
            }
            for r in NodeId::all(self.n) {
                if !self.seen.contains(&(r, m.sender, m.round)) {
                    out.push((MessageId(id), r));
                }
            }
        }
        out
    }
}
