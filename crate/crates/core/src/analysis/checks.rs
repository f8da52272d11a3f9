use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::adversary::AdversaryStrategy;
use crate::geometry::{hausdorff_sq, hull, safe_area};
use crate::protocol::{function_h, verify};
use crate::rbcast::{DeliveryPlan, MessageSet, NodeId, Round};
use crate::scalar::{format_rational, Rational};
use crate::sim::ExecutionTrace;
use crate::{Point, Polytope};

use super::matrix::{build_matrix, matrix_apply, Matrix, TransitionMatrix};
use super::{AnalysisError, TraceView};

/// Slack on float comparisons involving square roots.
const SQRT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub witness: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub pass: bool,
    pub t_end: Round,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Pass carries a summary, fail carries the offending round or pair.
type Outcome = Result<Value, Value>;

struct Ctx<'a> {
    view: &'a TraceView,
    /// `M[1..=t_end]`, or why they could not be rebuilt.
    matrices: Result<Vec<TransitionMatrix>, AnalysisError>,
}

/// Lower bound on the output: the safe area of the inputs every fault-free
/// stable-vector return shares.
pub fn compute_i_z(view: &TraceView) -> Result<Polytope, AnalysisError> {
    let x_z = common_inputs(view)?;
    let points: Vec<Point> = x_z.into_values().collect();
    if points.is_empty() {
        return Err(AnalysisError::IncompleteTrace("no common inputs".into()));
    }
    Ok(safe_area(&points, view.params.f)?)
}

fn common_inputs(view: &TraceView) -> Result<BTreeMap<NodeId, Point>, AnalysisError> {
    let mut z: Option<BTreeMap<NodeId, Point>> = None;
    for &i in &view.fault_free {
        let Some(MessageSet::Inputs(set)) = view.rc.get(&(i, -1)) else {
            return Err(AnalysisError::IncompleteTrace(format!(
                "no round -1 set for node {i}"
            )));
        };
        z = Some(match z {
            None => set.clone(),
            Some(acc) => acc
                .into_iter()
                .filter(|(k, x)| set.get(k) == Some(x))
                .collect(),
        });
    }
    z.ok_or_else(|| AnalysisError::IncompleteTrace("no fault-free nodes".into()))
}

/// Runs every check against `trace`.
pub fn check_suite(trace: &ExecutionTrace) -> Report {
    let view = TraceView::new(trace);
    let matrices = (1..=view.t_end).map(|t| build_matrix(&view, t)).collect();
    let ctx = Ctx {
        view: &view,
        matrices,
    };
    type CheckFn = fn(&Ctx) -> Result<Outcome, AnalysisError>;
    let all: [(&str, CheckFn); 15] = [
        ("termination", termination),
        ("broadcast_primitives", broadcast_primitives),
        ("replay", replay),
        ("nonempty", nonempty),
        ("validity", validity),
        ("agreement", agreement),
        ("optimality", optimality),
        ("convergence", convergence),
        ("spread_envelope", spread_envelope),
        ("matrix_form", matrix_form),
        ("matrix_bounds", matrix_bounds),
        ("ergodicity", ergodicity),
        ("unverified_columns", unverified_columns),
        ("unverified_exclusion", unverified_exclusion),
        ("verification_semantics", verification_semantics),
    ];
    let checks: Vec<CheckResult> = all
        .iter()
        .map(|(name, f)| {
            let (pass, witness) = match f(&ctx) {
                Ok(Ok(v)) => (true, v),
                Ok(Err(v)) => (false, v),
                Err(e) => (false, json!({ "error": e.to_string() })),
            };
            CheckResult {
                name: name.to_string(),
                pass,
                witness,
            }
        })
        .collect();
    Report {
        pass: checks.iter().all(|c| c.pass),
        t_end: view.t_end,
        checks,
    }
}

fn rat(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn f64_of(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn pow(x: &Rational, k: Round) -> Rational {
    (0..k).fold(Rational::one(), |acc, _| acc * x)
}

fn fault_free_h(view: &TraceView, i: NodeId, t: Round) -> Result<&Polytope, AnalysisError> {
    view.h
        .get(&(i, t))
        .ok_or_else(|| AnalysisError::IncompleteTrace(format!("no h for node {i} in round {t}")))
}

/// Largest exact squared Hausdorff distance between fault-free states of
/// round `t`, with the pair attaining it.
fn max_spread_sq(
    view: &TraceView,
    t: Round,
) -> Result<(Rational, Option<(NodeId, NodeId)>), AnalysisError> {
    let mut best = Rational::zero();
    let mut pair = None;
    let ff = &view.fault_free;
    for (a, &i) in ff.iter().enumerate() {
        for &j in &ff[a + 1..] {
            let d = hausdorff_sq(fault_free_h(view, i, t)?, fault_free_h(view, j, t)?)?;
            if pair.is_none() || d > best {
                best = d;
                pair = Some((i, j));
            }
        }
    }
    Ok((best, pair))
}

fn termination(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let expected = v.params.t_end();
    if v.t_end != expected {
        return Ok(Err(
            json!({ "header_t_end": v.t_end, "expected": expected }),
        ));
    }
    for &i in &v.fault_free {
        let Some((t, out)) = v.decisions.get(&i) else {
            return Ok(Err(json!({ "undecided": i })));
        };
        if *t != expected {
            return Ok(Err(
                json!({ "node": i, "decided_at": t, "expected": expected }),
            ));
        }
        for r in 0..=expected {
            if !v.h.contains_key(&(i, r)) {
                return Ok(Err(json!({ "node": i, "missing_round": r })));
            }
        }
        if fault_free_h(v, i, expected)? != out {
            return Ok(Err(
                json!({ "node": i, "decision_differs_from_state": expected }),
            ));
        }
    }
    Ok(Ok(
        json!({ "t_end": expected, "decided": v.fault_free.len() }),
    ))
}

fn broadcast_primitives(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    if v.send_index.len() != v.sends.len() {
        return Ok(Err(json!({
            "sends": v.sends.len(),
            "distinct_sender_rounds": v.send_index.len()
        })));
    }
    for (id, s) in &v.sends {
        if s.plan == DeliveryPlan::Withheld {
            if v.is_fault_free(s.sender) {
                return Ok(Err(
                    json!({ "withheld_by_fault_free": s.sender, "round": s.round }),
                ));
            }
            continue;
        }
        for &i in &v.fault_free {
            if !v.received.contains(&(i, *id)) {
                return Ok(Err(json!({
                    "undelivered": id.0,
                    "sender": s.sender,
                    "round": s.round,
                    "receiver": i
                })));
            }
        }
    }
    let floor = v.params.n - v.params.f;
    let mut returns: Vec<(NodeId, &Vec<_>)> = v
        .fault_free
        .iter()
        .filter_map(|i| v.sv.get(i).map(|s| (*i, s)))
        .collect();
    if returns.len() != v.fault_free.len() {
        return Ok(Err(
            json!({ "missing_sv_returns": v.fault_free.len() - returns.len() }),
        ));
    }
    returns.sort_by_key(|(_, s)| s.len());
    for (i, s) in &returns {
        if s.len() < floor {
            return Ok(Err(
                json!({ "node": i, "sv_size": s.len(), "floor": floor }),
            ));
        }
    }
    for w in returns.windows(2) {
        let (small, large) = (w[0].1, w[1].1);
        if large[..small.len()] != small[..] {
            return Ok(Err(json!({ "sv_not_nested": [w[0].0, w[1].0] })));
        }
    }
    Ok(Ok(json!({ "sends": v.sends.len(), "refused": v.refused })))
}

fn replay(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let p = &v.params;
    let mut count = 0usize;
    for ((i, t), h) in &v.h {
        if !v.is_fault_free(*i) {
            continue;
        }
        let rc = v.rc.get(&(*i, *t)).ok_or_else(|| {
            AnalysisError::IncompleteTrace(format!("no R^c for node {i} in round {t}"))
        })?;
        let again = function_h(rc, *t, p.f, p.d)
            .map_err(|e| AnalysisError::IncompleteTrace(e.to_string()))?;
        if &again != h {
            return Ok(Err(json!({ "node": i, "round": t, "recomputed": again })));
        }
        count += 1;
    }
    for &k in &v.faulty {
        for r in 0..v.t_end {
            if !v.is_verified(k, r) {
                continue;
            }
            let (h, set) = v.state(k, r)?;
            if !verify(p, h, set, k, r + 1) {
                return Ok(Err(json!({ "verified_report_fails": k, "round": r + 1 })));
            }
            count += 1;
        }
    }
    Ok(Ok(json!({ "replayed": count })))
}

fn nonempty(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    for (i, t, h) in ctx.view.fault_free_states() {
        if t >= 0 && h.is_empty() {
            return Ok(Err(json!({ "node": i, "round": t })));
        }
    }
    Ok(Ok(json!({})))
}

fn validity(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let inputs: Vec<Point> = v
        .fault_free
        .iter()
        .map(|k| v.inputs[k.index()].clone())
        .collect();
    let range = hull(&inputs)?;
    let mut count = 0usize;
    for (i, t, h) in v.fault_free_states() {
        if t < 0 {
            continue;
        }
        if !range.contains_polytope(h)? {
            return Ok(Err(json!({ "node": i, "round": t, "h": h })));
        }
        count += 1;
    }
    for (i, (_, h)) in &v.decisions {
        if v.is_fault_free(*i) && !range.contains_polytope(h)? {
            return Ok(Err(json!({ "decision": i })));
        }
    }
    Ok(Ok(json!({ "states": count })))
}

fn agreement(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let eps = f64_of(&v.params.epsilon);
    let outs: Vec<(NodeId, &Polytope)> = v
        .decisions
        .iter()
        .filter(|(i, _)| v.is_fault_free(**i))
        .map(|(i, (_, h))| (*i, h))
        .collect();
    let mut worst = 0.0f64;
    for (a, (i, hi)) in outs.iter().enumerate() {
        for (j, hj) in &outs[a + 1..] {
            let d = f64_of(&hausdorff_sq(hi, hj)?).sqrt();
            if d >= eps + SQRT_SLACK {
                return Ok(Err(
                    json!({ "pair": [i, j], "distance": d, "epsilon": eps }),
                ));
            }
            worst = worst.max(d);
        }
    }
    Ok(Ok(json!({ "max_distance": worst, "epsilon": eps })))
}

fn optimality(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let x_z = common_inputs(v)?;
    let floor = v.params.n - v.params.f;
    if x_z.len() < floor {
        return Ok(Err(json!({ "common_inputs": x_z.len(), "floor": floor })));
    }
    let i_z = compute_i_z(v)?;
    if i_z.is_empty() {
        return Ok(Err(json!({ "i_z_empty": true })));
    }
    for (i, t, h) in v.fault_free_states() {
        if t >= 0 && !h.contains_polytope(&i_z)? {
            return Ok(Err(json!({ "node": i, "round": t, "i_z": i_z, "h": h })));
        }
    }
    let faulty_in_z: Vec<NodeId> = x_z
        .keys()
        .copied()
        .filter(|k| !v.is_fault_free(*k))
        .collect();
    Ok(Ok(json!({
        "common_inputs": x_z.len(),
        "faulty_in_z": faulty_in_z,
        "i_z": i_z
    })))
}

fn convergence(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let alpha = v.params.alpha();
    let root = f64_of(&v.params.spread_bound_sq()).sqrt();
    let mut per_round = Vec::new();
    for t in 0..=v.t_end {
        let (sq, pair) = max_spread_sq(v, t)?;
        let d = f64_of(&sq).sqrt();
        let bound = f64_of(&pow(&alpha, t)) * root;
        if d > bound + SQRT_SLACK {
            return Ok(Err(
                json!({ "round": t, "pair": pair, "distance": d, "bound": bound }),
            ));
        }
        per_round.push(d);
    }
    Ok(Ok(json!({ "max_distance_per_round": per_round })))
}

/// Tighter form of the convergence bound using the measured round-0
/// magnitudes instead of the worst case.
fn spread_envelope(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let d = v.params.d;
    let mut sums = vec![Rational::zero(); d];
    for k in v.accounted(0) {
        let (h, _) = v.state(k, 0)?;
        for (l, s) in sums.iter_mut().enumerate() {
            let m = h
                .vertices()
                .iter()
                .map(|p| p.coords()[l].abs())
                .fold(Rational::zero(), |a, x| if x > a { x } else { a });
            *s += m;
        }
    }
    let omega_sq = sums.iter().fold(Rational::zero(), |a, s| a + s * s);
    let cap = v.params.spread_bound_sq();
    if omega_sq > cap {
        return Ok(Err(json!({ "omega_sq": rat(&omega_sq), "cap": rat(&cap) })));
    }
    let omega = f64_of(&omega_sq).sqrt();
    let alpha = v.params.alpha();
    for t in 0..=v.t_end {
        let (sq, pair) = max_spread_sq(v, t)?;
        let dist = f64_of(&sq).sqrt();
        let bound = f64_of(&pow(&alpha, t)) * omega;
        if dist > bound + SQRT_SLACK {
            return Ok(Err(
                json!({ "round": t, "pair": pair, "distance": dist, "bound": bound }),
            ));
        }
    }
    Ok(Ok(json!({ "omega": omega, "cap": f64_of(&cap).sqrt() })))
}

fn matrices<'a>(ctx: &'a Ctx) -> Result<&'a [TransitionMatrix], AnalysisError> {
    ctx.matrices.as_deref().map_err(Clone::clone)
}

fn initial_vector(v: &TraceView) -> Result<Vec<Polytope>, AnalysisError> {
    let out = v.unverified(0);
    NodeId::all(v.n())
        .map(|k| {
            if out.contains(&k) {
                Ok(Polytope::point(Point::origin(v.params.d)))
            } else {
                v.state(k, 0).map(|(h, _)| h.clone())
            }
        })
        .collect()
}

fn matrix_form(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let ms = matrices(ctx)?;
    let mut vec = initial_vector(v)?;
    let mut compared = 0usize;
    for m in ms {
        vec = matrix_apply(&m.matrix, &vec)?;
        for i in v.accounted(m.round) {
            let (h, _) = v.state(i, m.round)?;
            if &vec[i.index()] != h {
                return Ok(Err(json!({
                    "round": m.round,
                    "node": i,
                    "reconstructed": vec[i.index()],
                    "traced": h
                })));
            }
            compared += 1;
        }
    }
    Ok(Ok(json!({ "compared": compared })))
}

fn matrix_bounds(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let n = v.n();
    let cap = Rational::one() - Rational::new(1.into(), (n as i64).into());
    let floor = Rational::new(1.into(), (n as i64).into());
    let mut worst = Rational::zero();
    for m in matrices(ctx)? {
        let e = m.matrix.ergodicity()?;
        if e.lambda > cap {
            return Ok(Err(
                json!({ "round": m.round, "lambda": rat(&e.lambda), "cap": rat(&cap) }),
            ));
        }
        if e.lambda > worst {
            worst = e.lambda.clone();
        }
        for a in 0..n {
            for b in a..n {
                let shared = v.fault_free.iter().any(|g| {
                    m.matrix.get(a, g.index()) >= &floor && m.matrix.get(b, g.index()) >= &floor
                });
                if !shared {
                    return Ok(Err(
                        json!({ "round": m.round, "rows": [a, b], "no_common_fault_free_column": true }),
                    ));
                }
            }
        }
    }
    Ok(Ok(json!({ "max_lambda": rat(&worst), "cap": rat(&cap) })))
}

fn ergodicity(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let alpha = v.params.alpha();
    let mut product = Matrix::identity(v.n());
    let mut lambdas = Rational::one();
    let mut rows = Vec::new();
    for m in matrices(ctx)? {
        product = m.matrix.mul(&product);
        lambdas *= m.matrix.ergodicity()?.lambda;
        let delta = product.ergodicity()?.delta;
        let a_t = pow(&alpha, m.round);
        if delta > lambdas || delta > a_t {
            return Ok(Err(json!({
                "round": m.round,
                "delta": rat(&delta),
                "lambda_product": rat(&lambdas),
                "alpha_power": rat(&a_t)
            })));
        }
        rows.push(json!([m.round, f64_of(&delta), f64_of(&lambdas)]));
    }
    Ok(Ok(json!({ "round_delta_lambda_product": rows })))
}

/// First round from which each faulty node stays unverified, if it ever is.
fn first_unverified(v: &TraceView) -> BTreeMap<NodeId, Round> {
    v.faulty
        .iter()
        .filter_map(|&k| {
            (0..=v.t_end)
                .find(|&r| !v.is_verified(k, r))
                .map(|r| (k, r))
        })
        .collect()
}

fn unverified_columns(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let ms = matrices(ctx)?;
    let starts: BTreeSet<Round> = first_unverified(v).into_values().collect();
    let mut checked = 0usize;
    for &r in &starts {
        let columns: Vec<NodeId> = v.unverified(r).into_iter().collect();
        let mut product = Matrix::identity(v.n());
        for m in ms.iter().filter(|m| m.round > r) {
            product = m.matrix.mul(&product);
            for i in v.accounted(m.round) {
                for &b in &columns {
                    if !product.get(i.index(), b.index()).is_zero() {
                        return Ok(Err(json!({
                            "from_round": r,
                            "round": m.round,
                            "row": i,
                            "column": b,
                            "entry": rat(product.get(i.index(), b.index()))
                        })));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(Ok(
        json!({ "entries_checked": checked, "unverified_from": first_unverified(v) }),
    ))
}

fn unverified_exclusion(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    for (k, r) in first_unverified(v) {
        for later in r..=v.t_end {
            if v.is_verified(k, later) {
                return Ok(Err(
                    json!({ "node": k, "unverified_at": r, "verified_again_at": later }),
                ));
            }
        }
        for &i in &v.fault_free {
            for t in (r + 1)..=v.t_end {
                if let Some(rc) = v.rc.get(&(i, t)) {
                    if rc.contains_sender(k) {
                        return Ok(Err(
                            json!({ "node": k, "unverified_at": r, "present_in": [i, t] }),
                        ));
                    }
                }
            }
        }
    }
    Ok(Ok(json!({ "unverified_from": first_unverified(v) })))
}

/// Strategy-level expectations about which reports get verified.
fn verification_semantics(ctx: &Ctx) -> Result<Outcome, AnalysisError> {
    let v = ctx.view;
    let mut summary = BTreeMap::new();
    for (&k, strategy) in &v.strategies {
        let verified: Vec<Round> = (-1..v.t_end).filter(|&r| v.is_verified(k, r)).collect();
        match strategy {
            AdversaryStrategy::HonestBadInput | AdversaryStrategy::WithholdPartial { .. } => {
                if verified.len() as Round != v.t_end + 1 {
                    return Ok(Err(
                        json!({ "node": k, "expected_all_rounds": true, "verified": verified }),
                    ));
                }
            }
            s => {
                if let Some(round) = s.deviating_round() {
                    if round <= v.t_end && v.is_verified(k, round - 1) {
                        return Ok(Err(
                            json!({ "node": k, "deviating_round": round, "verified": true }),
                        ));
                    }
                }
            }
        }
        summary.insert(k.to_string(), verified.len());
    }
    Ok(Ok(json!({ "verified_round_counts": summary })))
}
