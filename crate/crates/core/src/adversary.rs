//! Byzantine behaviour and scheduling.
//!
//! A faulty node runs the ordinary state machine; each broadcast it would
//! make passes through [`act`], which may rewrite, delay, or suppress it.
//! The primitives still hold: one value per `(sender, round)` and no forged
//! senders. Everything random is drawn from one seeded [`Scheduler`].

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::protocol::{function_h, NodeState, Params};
use crate::rbcast::{Channel, DeliveryPlan, MessageId, MessageSet, MessageValue, NodeId, Round};
use crate::Point;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum AdversaryStrategy {
    /// Follows the protocol; only its configured input is adversarial.
    HonestBadInput,
    /// Stops broadcasting from `from_round` on.
    Silent { from_round: Round },
    /// In `round >= 1`, reports a translated copy of its state.
    MalformedPolytope { round: Round },
    /// In `round`, reports a set with `n - f - 1` entries.
    ShortSnapshot { round: Round },
    /// In `round >= 2`, leaves its own entry out of the reported set.
    StaleOmission { round: Round },
    /// Honest content, but the round's broadcast is held back for `delay`
    /// deliveries.
    WithholdPartial { round: Round, delay: u64 },
    /// Explicit replacement sends. Rounds without an entry stay honest.
    CustomScript { sends: Vec<ScriptedSend> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedSend {
    pub round: Round,
    /// Replacement payload; `None` keeps the honest one.
    #[serde(default)]
    pub value: Option<MessageValue>,
    #[serde(default)]
    pub plan: DeliveryPlan,
}

/// A primitive call requested by a faulty node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Send {
    pub round: Round,
    pub value: MessageValue,
    pub plan: DeliveryPlan,
}

impl AdversaryStrategy {
    pub fn validate(&self) -> Result<(), String> {
        let bad = |what: &str, r: Round| Err(format!("{what} needs a round of at least {r}"));
        match *self {
            AdversaryStrategy::Silent { from_round } if from_round < -1 => bad("silent", -1),
            AdversaryStrategy::MalformedPolytope { round } if round < 1 => {
                bad("malformed-polytope", 1)
            }
            AdversaryStrategy::ShortSnapshot { round } if round < 0 => bad("short-snapshot", 0),
            AdversaryStrategy::StaleOmission { round } if round < 2 => bad("stale-omission", 2),
            AdversaryStrategy::WithholdPartial { round, .. } if round < -1 => {
                bad("withhold-partial", -1)
            }
            _ => Ok(()),
        }
    }

    /// The round whose report this strategy corrupts, if any.
    pub fn deviating_round(&self) -> Option<Round> {
        match *self {
            AdversaryStrategy::MalformedPolytope { round }
            | AdversaryStrategy::ShortSnapshot { round }
            | AdversaryStrategy::StaleOmission { round } => Some(round),
            _ => None,
        }
    }
}

/// Turns the honest broadcast `value` for `round` into the calls a faulty
/// node actually makes.
pub fn act(
    strategy: &AdversaryStrategy,
    node: &NodeState,
    round: Round,
    value: MessageValue,
) -> Vec<Send> {
    let params = node.params();
    let honest = |value| {
        vec![Send {
            round,
            value,
            plan: DeliveryPlan::Normal,
        }]
    };
    match strategy {
        AdversaryStrategy::HonestBadInput => honest(value),
        AdversaryStrategy::Silent { from_round } if round >= *from_round => Vec::new(),
        AdversaryStrategy::MalformedPolytope { round: r } if *r == round => match value {
            MessageValue::Report { h, set } => {
                let shift = Point::new(vec![crate::Rational::from_integer(1.into()); params.d]);
                let moved = crate::Polytope::from_points(
                    params.d,
                    &h.vertices().iter().map(|v| v + &shift).collect::<Vec<_>>(),
                )
                .unwrap_or(h);
                honest(MessageValue::Report { h: moved, set })
            }
            other => honest(other),
        },
        AdversaryStrategy::ShortSnapshot { round: r } if *r == round => match value {
            MessageValue::Report { h, set } => {
                let short = set.truncated((params.n - params.f).saturating_sub(1));
                let h = recompute(params, &short, round).unwrap_or(h);
                honest(MessageValue::Report { h, set: short })
            }
            other => honest(other),
        },
        AdversaryStrategy::StaleOmission { round: r } if *r == round => match value {
            MessageValue::Report { h, set } => {
                let me = node.id();
                let mut stale = set.without(me);
                if let Some(pool) = node.r(round - 1) {
                    for k in pool.senders() {
                        if stale.len() >= set.len() {
                            break;
                        }
                        if k != me && !stale.contains_sender(k) {
                            stale = stale.with_entry_from(pool, k);
                        }
                    }
                }
                let h = recompute(params, &stale, round).unwrap_or(h);
                honest(MessageValue::Report { h, set: stale })
            }
            other => honest(other),
        },
        AdversaryStrategy::WithholdPartial { round: r, delay } if *r == round => vec![Send {
            round,
            value,
            plan: DeliveryPlan::Delayed { after: *delay },
        }],
        AdversaryStrategy::CustomScript { sends } => {
            let mine: Vec<&ScriptedSend> = sends.iter().filter(|s| s.round == round).collect();
            if mine.is_empty() {
                return honest(value);
            }
            mine.into_iter()
                .map(|s| Send {
                    round,
                    value: s.value.clone().unwrap_or_else(|| value.clone()),
                    plan: s.plan,
                })
                .collect()
        }
        _ => honest(value),
    }
}

fn recompute(params: &Params, set: &MessageSet, round: Round) -> Option<crate::Polytope> {
    if round < 1 {
        return None;
    }
    function_h(set, round - 1, params.f, params.d).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum DeliveryOrder {
    /// Uniform over everything that can happen next.
    #[default]
    Random,
    /// Oldest message first.
    Fifo,
    /// Messages from these senders go last whenever anything else can move.
    DelaySenders { senders: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum PrefixRule {
    /// Uniform in `[n - f, |order|]`.
    #[default]
    Random,
    /// Always `n - f`.
    Minimal,
    /// Per-node requested lengths, clamped by the ledger.
    Fixed { lengths: Vec<usize> },
}

/// Whether faulty nodes' inputs appear in the stable-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultyPlacement {
    #[default]
    Random,
    Include,
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerPolicy {
    pub seed: u64,
    #[serde(default)]
    pub delivery: DeliveryOrder,
    #[serde(default)]
    pub sv_prefix: PrefixRule,
    #[serde(default)]
    pub sv_faulty: FaultyPlacement,
}

impl Default for SchedulerPolicy {
    fn default() -> Self {
        Self {
            seed: 0,
            delivery: DeliveryOrder::Random,
            sv_prefix: PrefixRule::Random,
            sv_faulty: FaultyPlacement::Random,
        }
    }
}

/// Next thing the event loop may do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    SvReturn(NodeId),
    Deliver(Channel),
}

pub struct Scheduler {
    policy: SchedulerPolicy,
    rng: ChaCha8Rng,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(policy.seed);
        Self { policy, rng }
    }

    /// Global stable-vector order over registered round `-1` messages.
    pub fn sv_order(
        &mut self,
        candidates: &[(MessageId, NodeId)],
        faulty: &BTreeSet<NodeId>,
    ) -> Vec<MessageId> {
        let mut order: Vec<MessageId> = Vec::new();
        for &(id, sender) in candidates {
            let keep = !faulty.contains(&sender)
                || match self.policy.sv_faulty {
                    FaultyPlacement::Include => true,
                    FaultyPlacement::Exclude => false,
                    FaultyPlacement::Random => self.rng.gen_bool(0.5),
                };
            if keep {
                order.push(id);
            }
        }
        order.shuffle(&mut self.rng);
        order
    }

    pub fn prefix_len(&mut self, node: NodeId, min: usize, max: usize) -> usize {
        match &self.policy.sv_prefix {
            PrefixRule::Random if max > min => self.rng.gen_range(min..=max),
            PrefixRule::Random | PrefixRule::Minimal => min,
            PrefixRule::Fixed { lengths } => lengths.get(node.index()).copied().unwrap_or(min),
        }
    }

    /// Index into `actions` of the next step. `actions` is non-empty.
    pub fn choose(&mut self, actions: &[Action]) -> usize {
        match &self.policy.delivery {
            DeliveryOrder::Random => self.rng.gen_range(0..actions.len()),
            DeliveryOrder::Fifo => actions
                .iter()
                .enumerate()
                .min_by_key(|(_, a)| match a {
                    Action::SvReturn(k) => (0, k.0 as usize),
                    Action::Deliver(ch) => (1, ch.head.0),
                })
                .map(|(i, _)| i)
                .expect("non-empty action list"),
            DeliveryOrder::DelaySenders { senders } => {
                let preferred: Vec<usize> = actions
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| match a {
                        Action::Deliver(ch) => !senders.contains(&ch.sender),
                        Action::SvReturn(_) => true,
                    })
                    .map(|(i, _)| i)
                    .collect();
                if preferred.is_empty() {
                    self.rng.gen_range(0..actions.len())
                } else {
                    preferred[self.rng.gen_range(0..preferred.len())]
                }
            }
        }
    }
}
