use std::collections::HashMap;

use crate::geometry::{linear_combination, safe_area, GeometryError, WeightVector};
use crate::rbcast::{MessageSet, NodeId, Round, Snapshot};
use crate::{Point, Polytope};

use super::{Params, ProtocolError};

/// Round-state aggregation `H(V, t)`.
///
/// For `t = 0`, `V` holds stable-vector snapshots. A value `x` from sender
/// `k` survives when at least `f + 1` snapshots report it; survivors form a
/// multiset (one copy per sender) whose safe area is returned. For `t >= 1`,
/// `V` holds polytopes and the result is their uniform average.
pub fn function_h(v: &MessageSet, t: Round, f: usize, d: usize) -> Result<Polytope, ProtocolError> {
    match (t, v) {
        (0, MessageSet::Snapshots(snaps)) => {
            let mut counts: HashMap<(NodeId, &Point), usize> = HashMap::new();
            for Snapshot(inputs) in snaps.values() {
                for (k, x) in inputs {
                    *counts.entry((*k, x)).or_default() += 1;
                }
            }
            let mut kept: Vec<(NodeId, &Point)> = counts
                .into_iter()
                .filter(|&(_, c)| c > f)
                .map(|(key, _)| key)
                .collect();
            kept.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.lex_cmp(b.1)));
            let survivors: Vec<Point> = kept.into_iter().map(|(_, x)| x.clone()).collect();
            if survivors.iter().any(|x| x.dim() != d) {
                return Err(GeometryError::MixedDimension {
                    expected: d,
                    found: survivors
                        .iter()
                        .map(Point::dim)
                        .find(|&e| e != d)
                        .unwrap_or(d),
                }
                .into());
            }
            Ok(safe_area(&survivors, f)?)
        }
        (t, MessageSet::States(states)) if t >= 1 => {
            if states.is_empty() {
                return Err(GeometryError::NoOperands.into());
            }
            let hs: Vec<Polytope> = states.values().cloned().collect();
            if let Some(h) = hs.iter().find(|h| h.dim() != d) {
                return Err(GeometryError::MixedDimension {
                    expected: d,
                    found: h.dim(),
                }
                .into());
            }
            let w = WeightVector::uniform(hs.len())?;
            Ok(linear_combination(&hs, &w)?)
        }
        _ => Err(ProtocolError::WrongSetKind { round: t }),
    }
}

/// The verification checks applied to a round-`t` report `((h, V), j, t)`.
///
/// Any failure to evaluate `H` counts as a failed check.
pub fn verify(params: &Params, h: &Polytope, v: &MessageSet, j: NodeId, t: Round) -> bool {
    if t < 0 || v.len() < params.n - params.f {
        return false;
    }
    if !same_kind(v, t - 1) {
        return false;
    }
    match t {
        0 => true,
        _ => {
            let recomputed = match function_h(v, t - 1, params.f, params.d) {
                Ok(x) => x,
                Err(_) => return false,
            };
            if recomputed != *h {
                return false;
            }
            t == 1 || v.contains_sender(j)
        }
    }
}

fn same_kind(v: &MessageSet, round: Round) -> bool {
    matches!(
        (v, MessageSet::empty_for(round)),
        (MessageSet::Inputs(_), MessageSet::Inputs(_))
            | (MessageSet::Snapshots(_), MessageSet::Snapshots(_))
            | (MessageSet::States(_), MessageSet::States(_))
    )
}

/// Adds the verified report's contribution to `R[t]`.
///
/// Round 0 stores the sender's snapshot `(V, j, -1)`; later rounds store
/// `(h, j, t - 1)`. An existing entry for `j` is kept.
pub fn add(r: &MessageSet, h: &Polytope, v: &MessageSet, j: NodeId, t: Round) -> MessageSet {
    let mut out = r.clone();
    match (&mut out, v) {
        (MessageSet::Snapshots(m), MessageSet::Inputs(inputs)) if t == 0 => {
            m.entry(j).or_insert_with(|| Snapshot(inputs.clone()));
        }
        (MessageSet::States(m), _) if t >= 1 => {
            m.entry(j).or_insert_with(|| h.clone());
        }
        _ => {}
    }
    out
}

/// Whether `R[t]` is ready to be frozen at node `i`.
pub fn proceed(
    params: &Params,
    t: Round,
    r: &MessageSet,
    i: NodeId,
    own_prev: Option<&Polytope>,
) -> bool {
    if r.len() < params.n - params.f {
        return false;
    }
    if t == 0 {
        return true;
    }
    match (r, own_prev) {
        (MessageSet::States(m), Some(h)) => m.get(&i) == Some(h),
        _ => false,
    }
}
