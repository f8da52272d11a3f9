use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::adversary::{act, Action, Scheduler};
use crate::protocol::{NodeEvent, NodeState, ProtocolError, VerifyCache};
use crate::rbcast::{BroadcastLedger, DeliveryPlan, MessageValue, NodeId, Round};

use super::{ConfigError, ExecutionConfig, ExecutionTrace, TraceEvent, TraceHeader, TraceRecord};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    ConfigInvalid(#[from] ConfigError),
    #[error("deadlock: nodes {undecided:?} never decided ({reason})")]
    DeadlockDetected {
        undecided: Vec<NodeId>,
        reason: String,
        trace: Box<ExecutionTrace>,
    },
    #[error("node {node}: {source}")]
    Protocol {
        node: NodeId,
        #[source]
        source: ProtocolError,
    },
}

struct Run<'a> {
    config: &'a ExecutionConfig,
    nodes: Vec<NodeState>,
    ledger: BroadcastLedger,
    cache: VerifyCache,
    records: Vec<TraceRecord>,
}

impl Run<'_> {
    fn log(&mut self, event: TraceEvent) {
        let step = self.records.len() as u64;
        self.records.push(TraceRecord { step, event });
    }

    fn handle(&mut self, node: NodeId, events: Vec<NodeEvent>) {
        for e in events {
            let ev = match e {
                NodeEvent::Broadcast { round, value } => {
                    self.broadcast(node, round, value);
                    continue;
                }
                NodeEvent::Verified { sender, round, ok } => TraceEvent::Verify {
                    node,
                    sender,
                    round,
                    ok,
                },
                NodeEvent::Added { sender, round } => TraceEvent::Add {
                    node,
                    sender,
                    round,
                },
                NodeEvent::Frozen { round, set } => TraceEvent::RcFreeze { node, round, set },
                NodeEvent::Computed { round, h } => TraceEvent::HCompute { node, round, h },
                NodeEvent::Advanced { round } => TraceEvent::RoundAdvance { node, round },
                NodeEvent::Decided { h } => TraceEvent::Decide {
                    node,
                    t_end: self.nodes[node.index()].t_end(),
                    h,
                },
                NodeEvent::Dropped { sender, round } => TraceEvent::Drop {
                    node,
                    sender,
                    round,
                },
            };
            self.log(ev);
        }
    }

    fn broadcast(&mut self, node: NodeId, round: Round, value: MessageValue) {
        let sends = match self.config.faulty.get(&node) {
            Some(strategy) => act(strategy, &self.nodes[node.index()], round, value),
            None => vec![crate::adversary::Send {
                round,
                value,
                plan: DeliveryPlan::Normal,
            }],
        };
        for s in sends {
            match self.ledger.rb_send(node, s.round, s.value.clone(), s.plan) {
                Ok(id) => self.log(TraceEvent::RbSend {
                    sender: node,
                    round: s.round,
                    id,
                    value: s.value,
                    plan: s.plan,
                }),
                Err(e) => self.log(TraceEvent::RbRefused {
                    sender: node,
                    round: s.round,
                    reason: e.to_string(),
                }),
            }
        }
    }

    fn undecided(&self) -> Vec<NodeId> {
        self.config
            .fault_free()
            .into_iter()
            .filter(|k| self.nodes[k.index()].output().is_none())
            .collect()
    }

    fn into_trace(self, t_end: Round) -> ExecutionTrace {
        ExecutionTrace {
            header: TraceHeader {
                config: self.config.clone(),
                t_end,
            },
            records: self.records,
        }
    }
}

/// Executes `config` to completion under its seeded scheduler.
///
/// The loop ends only when nothing is left to deliver, so every registered
/// message has reached every node by then.
pub fn run(config: &ExecutionConfig) -> Result<ExecutionTrace, SimError> {
    config.validate()?;
    let p = &config.params;
    let t_end = p.t_end();
    let faulty = config.faulty_set();
    let mut sim = Run {
        config,
        nodes: NodeId::all(p.n)
            .map(|k| NodeState::new(k, p.clone(), config.input(k).clone()))
            .collect(),
        ledger: BroadcastLedger::new(p.n, p.f, faulty.clone()),
        cache: VerifyCache::default(),
        records: Vec::new(),
    };
    let mut sched = Scheduler::new(config.scheduler.clone());

    for k in NodeId::all(p.n) {
        let events = sim.nodes[k.index()].on_start();
        sim.handle(k, events);
    }
    let candidates: Vec<_> = sim
        .ledger
        .sv_candidates()
        .into_iter()
        .map(|id| (id, sim.ledger.message(id).sender))
        .collect();
    let order = sched.sv_order(&candidates, &faulty);
    sim.ledger.fix_sv_order(order);

    let mut waiting: BTreeSet<NodeId> = NodeId::all(p.n).collect();
    if let Err(e) = sim.ledger.sv_prefix_len(0) {
        return Err(deadlock(sim, t_end, e.to_string()));
    }
    let max_prefix = sim.ledger.sv_order().map_or(0, <[_]>::len);

    loop {
        let mut actions: Vec<Action> = waiting.iter().map(|&k| Action::SvReturn(k)).collect();
        actions.extend(sim.ledger.eligible().into_iter().map(Action::Deliver));
        if actions.is_empty() {
            if sim.ledger.release_delayed() {
                continue;
            }
            break;
        }
        match actions[sched.choose(&actions)] {
            Action::SvReturn(k) => {
                waiting.remove(&k);
                let want = sched.prefix_len(k, p.n - p.f, max_prefix);
                let msgs = match sim.ledger.sv_recv(k, want) {
                    Ok(m) => m,
                    Err(e) => return Err(deadlock(sim, t_end, e.to_string())),
                };
                let ids = sim.ledger.sv_returned()[&k].clone();
                sim.log(TraceEvent::SvReturn {
                    node: k,
                    messages: ids,
                });
                let events = sim.nodes[k.index()]
                    .on_sv_return(&msgs, &mut sim.cache)
                    .map_err(|source| SimError::Protocol { node: k, source })?;
                sim.handle(k, events);
            }
            Action::Deliver(ch) => {
                let d = sim
                    .ledger
                    .deliver(ch.sender, ch.receiver)
                    .expect("eligible channel has a head");
                let (receiver, sender, round, id) =
                    (d.receiver, d.message.sender, d.message.round, d.id);
                if d.suppressed {
                    sim.log(TraceEvent::Suppression {
                        receiver,
                        sender,
                        round,
                        id,
                    });
                    continue;
                }
                sim.log(TraceEvent::Delivery {
                    receiver,
                    sender,
                    round,
                    id,
                });
                let events = sim.nodes[receiver.index()]
                    .on_receive(d.message, &mut sim.cache)
                    .map_err(|source| SimError::Protocol {
                        node: receiver,
                        source,
                    })?;
                sim.handle(receiver, events);
            }
        }
    }

    if !sim.undecided().is_empty() {
        let stuck: BTreeMap<NodeId, Round> = sim
            .undecided()
            .into_iter()
            .map(|k| (k, sim.nodes[k.index()].round()))
            .collect();
        return Err(deadlock(sim, t_end, format!("stuck in rounds {stuck:?}")));
    }
    Ok(sim.into_trace(t_end))
}

fn deadlock(sim: Run<'_>, t_end: Round, reason: String) -> SimError {
    let undecided = sim.undecided();
    SimError::DeadlockDetected {
        undecided,
        reason,
        trace: Box::new(sim.into_trace(t_end)),
    }
}
