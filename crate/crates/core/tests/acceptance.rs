//! Acceptance campaign. Prints one line per criterion and exits nonzero if
//! any of them fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use itertools::Itertools;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bcc_core::adversary::{AdversaryStrategy, PrefixRule, SchedulerPolicy};
use bcc_core::analysis::{check_suite, compute_i_z, Report, TraceView};
use bcc_core::geometry::{hausdorff, hull, linear_combination, safe_area};
use bcc_core::protocol::Params;
use bcc_core::rbcast::{MessageSet, NodeId};
use bcc_core::scalar::rational_ratio;
use bcc_core::sim::{run, ExecutionConfig, ExecutionTrace, TraceEvent};
use bcc_core::{Point, Polytope, Rational, WeightVector};

const SEEDS: u64 = 50;

// ---------------------------------------------------------------------------
// Exact brute-force predicates, independent of the geometry module.

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    let (ax, ay) = (a.x() - o.x(), a.y() - o.y());
    let (bx, by) = (b.x() - o.x(), b.y() - o.y());
    ax * by - ay * bx
}

fn between(p: &Rational, a: &Rational, b: &Rational) -> bool {
    (a <= p && p <= b) || (b <= p && p <= a)
}

fn on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    cross(a, b, p).is_zero() && between(p.x(), a.x(), b.x()) && between(p.y(), a.y(), b.y())
}

fn in_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> bool {
    if cross(a, b, c).is_zero() {
        return false;
    }
    let s = [cross(a, b, p), cross(b, c, p), cross(c, a, p)];
    let neg = s.iter().any(|x| x < &Rational::zero());
    let pos = s.iter().any(|x| x > &Rational::zero());
    !(neg && pos)
}

/// Membership in the hull of `pts` by Caratheodory enumeration.
fn in_hull_brute(p: &Point, pts: &[Point]) -> bool {
    if p.dim() == 1 {
        let lo = pts.iter().map(|q| q.coords()[0].clone()).min();
        let hi = pts.iter().map(|q| q.coords()[0].clone()).max();
        return match (lo, hi) {
            (Some(lo), Some(hi)) => lo <= p.coords()[0] && p.coords()[0] <= hi,
            _ => false,
        };
    }
    if pts.iter().any(|q| q == p) {
        return true;
    }
    for (a, b) in pts.iter().tuple_combinations() {
        if on_segment(p, a, b) {
            return true;
        }
    }
    pts.iter()
        .tuple_combinations()
        .any(|(a, b, c)| in_triangle(p, a, b, c))
}

fn line_intersection(a: &Point, b: &Point, c: &Point, d: &Point) -> Option<Point> {
    let r = b - a;
    let s = d - c;
    let denom = r.x() * s.y() - r.y() * s.x();
    if denom.is_zero() {
        return None;
    }
    let ca = c - a;
    let t = (ca.x() * s.y() - ca.y() * s.x()) / denom;
    Some(a + &r.scale(&t))
}

/// Candidate points that lie in every `(m - f)`-subset hull.
fn safe_area_oracle(pts: &[Point], f: usize) -> Vec<Point> {
    let m = pts.len();
    let subsets: Vec<Vec<Point>> = (0..m)
        .combinations(m - f)
        .map(|keep| keep.into_iter().map(|i| pts[i].clone()).collect())
        .collect();
    let mut cands: Vec<Point> = pts.to_vec();
    if pts[0].dim() == 2 {
        let lines: Vec<(&Point, &Point)> = pts
            .iter()
            .tuple_combinations()
            .filter(|(a, b)| a != b)
            .collect();
        for ((a, b), (c, d)) in lines.iter().tuple_combinations() {
            if let Some(p) = line_intersection(a, b, c, d) {
                cands.push(p);
            }
        }
    }
    cands
        .into_iter()
        .filter(|c| subsets.iter().all(|s| in_hull_brute(c, s)))
        .collect()
}

/// Two-way comparison of a computed polytope against oracle candidates:
/// every vertex is a candidate and every candidate is inside.
fn matches_candidates(result: &Polytope, cands: &[Point]) -> bool {
    if cands.is_empty() {
        return result.is_empty();
    }
    if result.is_empty() {
        return false;
    }
    result.vertices().iter().all(|v| cands.contains(v))
        && cands.iter().all(|c| in_hull_brute(c, result.vertices()))
}

// ---------------------------------------------------------------------------
// Float boundary-sampling Hausdorff oracle.

type F2 = (f64, f64);

fn seg_dist(p: F2, a: F2, b: F2) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = dx * dx + dy * dy;
    let t = if len == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

fn dist_to_polygon(p: F2, poly: &[F2]) -> f64 {
    let m = poly.len();
    if m >= 3 {
        let inside = (0..m).all(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % m]);
            (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= -1e-12
        });
        if inside {
            return 0.0;
        }
    }
    if m == 1 {
        return seg_dist(p, poly[0], poly[0]);
    }
    (0..m)
        .map(|i| seg_dist(p, poly[i], poly[(i + 1) % m]))
        .fold(f64::INFINITY, f64::min)
}

fn boundary_samples(poly: &[F2], per_edge: usize) -> Vec<F2> {
    let m = poly.len();
    let mut out = Vec::new();
    for i in 0..m {
        let (a, b) = (poly[i], poly[(i + 1) % m]);
        for s in 0..per_edge {
            let t = s as f64 / per_edge as f64;
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

fn as_f2(h: &Polytope) -> Vec<F2> {
    h.vertices()
        .iter()
        .map(|p| {
            let c = p.to_f64();
            (c[0], *c.get(1).unwrap_or(&0.0))
        })
        .collect()
}

fn hausdorff_oracle(a: &Polytope, b: &Polytope) -> f64 {
    let (pa, pb) = (as_f2(a), as_f2(b));
    let one_way = |from: &[F2], to: &[F2]| {
        boundary_samples(from, 25)
            .into_iter()
            .map(|p| dist_to_polygon(p, to))
            .fold(0.0, f64::max)
    };
    one_way(&pa, &pb).max(one_way(&pb, &pa))
}

// ---------------------------------------------------------------------------
// Random instances.

fn rand_point(rng: &mut ChaCha8Rng, d: usize, grid: i64, scale: &Rational) -> Point {
    Point::new(
        (0..d)
            .map(|_| rational_ratio(rng.gen_range(0..=grid), grid) * scale)
            .collect(),
    )
}

fn rand_points(rng: &mut ChaCha8Rng, d: usize, m: usize, grid: i64) -> Vec<Point> {
    let one = Rational::one();
    (0..m).map(|_| rand_point(rng, d, grid, &one)).collect()
}

fn rand_weights(rng: &mut ChaCha8Rng, k: usize) -> WeightVector {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    WeightVector::new(raw.into_iter().map(|w| rational_ratio(w, total)).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// Campaign configurations.

const CONFIGS: [&str; 6] = [
    "n5-f1-d1-bad-input",
    "n5-f0-d1-honest",
    "n5-f1-d2-silent",
    "n6-f1-d2-malformed",
    "n7-f2-d1-corrupted-sets",
    "n9-f2-d2-bad-input-withhold",
];

fn make_config(kind: usize, seed: u64) -> ExecutionConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(kind as u64));
    let (n, f, d, eps) = match kind {
        0 => (5, 1, 1, rational_ratio(1, 10)),
        1 => (5, 0, 1, rational_ratio(1, 10)),
        2 => (5, 1, 2, rational_ratio(1, 10)),
        3 => (6, 1, 2, rational_ratio(1, 10)),
        4 => (7, 2, 1, rational_ratio(1, 10)),
        _ => (9, 2, 2, rational_ratio(1, 2)),
    };
    let grid = if d == 1 { 8 } else { 4 };
    let inputs = rand_points(&mut rng, d, n, grid);
    let mut ids: Vec<NodeId> = NodeId::all(n).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let mut faulty = BTreeMap::new();
    match kind {
        0 => {
            faulty.insert(ids[0], AdversaryStrategy::HonestBadInput);
        }
        2 => {
            let from_round = [-1, 0, 1, 2, 5][rng.gen_range(0..5)];
            faulty.insert(ids[0], AdversaryStrategy::Silent { from_round });
        }
        3 => {
            let round = rng.gen_range(1..=4);
            faulty.insert(ids[0], AdversaryStrategy::MalformedPolytope { round });
        }
        4 => {
            let short = rng.gen_range(1..=3);
            let stale = rng.gen_range(2..=4);
            faulty.insert(ids[0], AdversaryStrategy::ShortSnapshot { round: short });
            faulty.insert(ids[1], AdversaryStrategy::StaleOmission { round: stale });
        }
        5 => {
            let round = rng.gen_range(-1..=3);
            let delay = rng.gen_range(1..=30);
            faulty.insert(ids[0], AdversaryStrategy::HonestBadInput);
            faulty.insert(ids[1], AdversaryStrategy::WithholdPartial { round, delay });
        }
        _ => {}
    }
    let mut inputs = inputs;
    for (k, s) in &faulty {
        if *s == AdversaryStrategy::HonestBadInput {
            // Push the faulty input to a corner of the allowed box.
            let corner = if rng.gen_bool(0.5) {
                Rational::one()
            } else {
                Rational::zero()
            };
            inputs[k.index()] = Point::new(vec![corner; d]);
        }
    }
    let sv_prefix = match seed % 3 {
        0 => PrefixRule::Random,
        1 => PrefixRule::Minimal,
        _ => PrefixRule::Fixed {
            lengths: vec![n; n],
        },
    };
    ExecutionConfig {
        params: Params {
            n,
            f,
            d,
            epsilon: eps,
            upper: Rational::one(),
            lower: Rational::zero(),
        },
        inputs,
        faulty,
        scheduler: SchedulerPolicy {
            seed,
            sv_prefix,
            ..SchedulerPolicy::default()
        },
    }
}

struct Outcome {
    label: String,
    report: Result<Report, String>,
    bad_input_in_z: bool,
    unverified_early: bool,
    i_z_oracle: bool,
}

/// `I_Z` rebuilt from raw trace events and compared with the library.
fn i_z_matches_oracle(trace: &ExecutionTrace) -> bool {
    let cfg = &trace.header.config;
    let faulty = cfg.faulty_set();
    let mut z: Option<BTreeMap<NodeId, Point>> = None;
    for e in trace.events() {
        if let TraceEvent::RcFreeze {
            node,
            round: -1,
            set: MessageSet::Inputs(set),
        } = e
        {
            if faulty.contains(node) {
                continue;
            }
            z = Some(match z {
                None => set.clone(),
                Some(acc) => acc
                    .into_iter()
                    .filter(|(k, x)| set.get(k) == Some(x))
                    .collect(),
            });
        }
    }
    let Some(z) = z else { return false };
    let pts: Vec<Point> = z.into_values().collect();
    let f = cfg.params.f;
    let cands = if pts[0].dim() == 1 {
        let mut xs: Vec<Rational> = pts.iter().map(|p| p.coords()[0].clone()).collect();
        xs.sort();
        let (lo, hi) = (xs[f].clone(), xs[xs.len() - 1 - f].clone());
        if lo <= hi {
            vec![Point::new(vec![lo]), Point::new(vec![hi])]
        } else {
            vec![]
        }
    } else {
        safe_area_oracle(&pts, f)
    };
    match compute_i_z(&TraceView::new(trace)) {
        Ok(i_z) => matches_candidates(&i_z, &cands),
        Err(_) => false,
    }
}

fn run_case(kind: usize, seed: u64) -> Outcome {
    let cfg = make_config(kind, seed);
    let label = format!("{} seed {}", CONFIGS[kind], seed);
    let trace = match run(&cfg) {
        Ok(t) => t,
        Err(e) => {
            return Outcome {
                label,
                report: Err(e.to_string()),
                bad_input_in_z: false,
                unverified_early: false,
                i_z_oracle: false,
            }
        }
    };
    let report = check_suite(&trace);
    let view = TraceView::new(&trace);
    let bad_input_in_z = report
        .get("optimality")
        .and_then(|c| c.witness.get("faulty_in_z"))
        .and_then(|v| v.as_array())
        .is_some_and(|ks| {
            ks.iter().any(|k| {
                let id = NodeId(k.as_u64().unwrap_or(0) as u32);
                view.strategies.get(&id) == Some(&AdversaryStrategy::HonestBadInput)
            })
        });
    let unverified_early = (0..view.t_end).any(|r| !view.unverified(r).is_empty());
    Outcome {
        label,
        report: Ok(report),
        bad_input_in_z,
        unverified_early,
        i_z_oracle: i_z_matches_oracle(&trace),
    }
}

// ---------------------------------------------------------------------------

struct Line {
    pass: bool,
    text: String,
}

fn criterion(num: u32, name: &str, pass: bool, detail: String) -> Line {
    Line {
        pass,
        text: format!(
            "criterion {num:>2} {name:<28} {}  {detail}",
            if pass { "PASS" } else { "FAIL" }
        ),
    }
}

/// Runs through the listed checks and names the first failing run.
fn from_checks(
    outcomes: &[Outcome],
    names: &[&str],
    filter: impl Fn(&Outcome) -> bool,
) -> (usize, usize, Option<String>) {
    let mut total = 0;
    let mut ok = 0;
    let mut first = None;
    for o in outcomes.iter().filter(|o| filter(o)) {
        total += 1;
        let failed: Vec<String> = match &o.report {
            Err(e) => vec![format!("run error: {e}")],
            Ok(r) => names
                .iter()
                .filter(|n| !r.get(n).is_some_and(|c| c.pass))
                .map(|n| {
                    let w = r.get(n).map(|c| c.witness.to_string()).unwrap_or_default();
                    format!("{n} {w}")
                })
                .collect(),
        };
        if failed.is_empty() {
            ok += 1;
        } else if first.is_none() {
            first = Some(format!("{}: {}", o.label, failed.join("; ")));
        }
    }
    (ok, total, first)
}

fn summary(ok: usize, total: usize, first: &Option<String>, what: &str) -> String {
    match first {
        None => format!("{ok}/{total} {what}"),
        Some(f) => format!("{ok}/{total} {what}; first failure {f}"),
    }
}

fn t_end_oracle(n: usize, d: usize, eps: f64, upper: f64, lower: f64) -> i64 {
    let alpha = (n as f64 - 1.0) / n as f64;
    let spread = (d as f64 * (n * n) as f64 * upper.powi(2).max(lower.powi(2))).sqrt();
    let mut t = 1;
    while alpha.powi(t as i32) * spread >= eps {
        t += 1;
    }
    t
}

fn tverberg_cases(count: usize) -> (usize, Option<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e5b);
    let mut ok = 0;
    let mut first = None;
    for case in 0..count {
        let d = rng.gen_range(1..=2);
        let f = rng.gen_range(1..=2);
        let m = (d + 1) * f + 1 + rng.gen_range(0..=2);
        let pts = rand_points(&mut rng, d, m, 6);
        let good = match safe_area(&pts, f) {
            Ok(s) => !s.is_empty() && s.vertices().iter().all(|v| in_hull_brute(v, &pts)),
            Err(_) => false,
        };
        if good {
            ok += 1;
        } else if first.is_none() {
            first = Some(format!("case {case}: d={d} f={f} m={m}"));
        }
    }
    (ok, first)
}

/// Geometry primitives against brute-force oracles.
fn oracle_cases(per_op: usize) -> (usize, usize, Option<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let mut ok = 0;
    let mut total = 0;
    let mut first = None;
    let mut note = |ok_case: bool, what: String, ok: &mut usize| {
        if ok_case {
            *ok += 1;
        } else if first.is_none() {
            first = Some(what);
        }
    };
    for case in 0..per_op {
        total += 1;
        let d = rng.gen_range(1..=2);
        let f = rng.gen_range(0..=2);
        let m = rng.gen_range((f + 1).max(3)..=7);
        let pts = rand_points(&mut rng, d, m, 8);
        let result = safe_area(&pts, f).unwrap();
        let cands = safe_area_oracle(&pts, f);
        note(
            matches_candidates(&result, &cands),
            format!("safe-area case {case}"),
            &mut ok,
        );
    }
    for case in 0..per_op {
        total += 1;
        let d = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=3);
        let polys: Vec<Polytope> = (0..k)
            .map(|_| {
                let m = rng.gen_range(1..=4);
                hull(&rand_points(&mut rng, d, m, 6)).unwrap()
            })
            .collect();
        let w = rand_weights(&mut rng, k);
        let result = linear_combination(&polys, &w).unwrap();
        let combos: Vec<Point> = polys
            .iter()
            .map(|p| p.vertices().to_vec())
            .multi_cartesian_product()
            .map(|choice| {
                choice
                    .iter()
                    .zip(w.as_slice())
                    .fold(Point::origin(d), |acc, (p, wi)| &acc + &p.scale(wi))
            })
            .collect();
        let good = !result.is_empty()
            && result.vertices().iter().all(|v| combos.contains(v))
            && combos.iter().all(|c| in_hull_brute(c, result.vertices()));
        note(good, format!("linear-combination case {case}"), &mut ok);
    }
    for case in 0..per_op {
        total += 1;
        let d = rng.gen_range(1..=2);
        let (ma, mb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let a = hull(&rand_points(&mut rng, d, ma, 10)).unwrap();
        let b = hull(&rand_points(&mut rng, d, mb, 10)).unwrap();
        let exact = hausdorff(&a, &b).unwrap();
        let approx = hausdorff_oracle(&a, &b);
        note(
            (exact - approx).abs() <= 1e-6,
            format!("hausdorff case {case}: {exact} vs {approx}"),
            &mut ok,
        );
    }
    (ok, total, first)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases: Vec<(usize, u64)> = (0..CONFIGS.len())
        .flat_map(|k| (0..SEEDS).map(move |s| (k, s)))
        .collect();
    let outcomes: Vec<Outcome> = cases.par_iter().map(|&(k, s)| run_case(k, s)).collect();
    let all = |_: &Outcome| true;
    let mut lines = Vec::new();

    // 1
    let spot = Params {
        n: 5,
        f: 1,
        d: 1,
        epsilon: rational_ratio(1, 10),
        upper: Rational::one(),
        lower: Rational::zero(),
    };
    let spot_lib = spot.t_end();
    let spot_oracle = t_end_oracle(5, 1, 0.1, 1.0, 0.0);
    let mut t_end_agree = true;
    for kind in 0..CONFIGS.len() {
        let p = make_config(kind, 0).params;
        let o = t_end_oracle(
            p.n,
            p.d,
            p.epsilon.to_f64().unwrap(),
            p.upper.to_f64().unwrap(),
            p.lower.to_f64().unwrap(),
        );
        t_end_agree &= o == p.t_end();
    }
    let (ok, total, first) = from_checks(&outcomes, &["termination", "broadcast_primitives"], all);
    lines.push(criterion(
        1,
        "termination",
        ok == total && spot_lib == 18 && spot_oracle == 18 && t_end_agree,
        format!(
            "{}; spot t_end {spot_lib} (oracle {spot_oracle})",
            summary(ok, total, &first, "runs decided at t_end")
        ),
    ));

    // 2
    let (ok, total, first) = from_checks(&outcomes, &["validity"], all);
    lines.push(criterion(
        2,
        "validity",
        ok == total,
        summary(ok, total, &first, "runs"),
    ));

    // 3
    let (ok, total, first) = from_checks(
        &outcomes,
        &["agreement", "convergence", "spread_envelope"],
        all,
    );
    lines.push(criterion(
        3,
        "epsilon-agreement",
        ok == total,
        summary(ok, total, &first, "runs"),
    ));

    // 4
    let (ok, total, first) = from_checks(&outcomes, &["nonempty"], all);
    let (tv_ok, tv_first) = tverberg_cases(200);
    lines.push(criterion(
        4,
        "nonemptiness",
        ok == total && tv_ok == 200,
        format!(
            "{}; tverberg {tv_ok}/200{}",
            summary(ok, total, &first, "runs"),
            tv_first
                .map(|f| format!(" first failure {f}"))
                .unwrap_or_default()
        ),
    ));

    // 5
    let (ok, total, first) = from_checks(
        &outcomes,
        &["matrix_form", "matrix_bounds", "ergodicity", "replay"],
        all,
    );
    lines.push(criterion(
        5,
        "matrix-equivalence",
        ok == total,
        summary(ok, total, &first, "runs"),
    ));

    // 6
    let (ok, total, first) = from_checks(&outcomes, &["optimality"], all);
    let with_bad = outcomes.iter().filter(|o| o.bad_input_in_z).count();
    lines.push(criterion(
        6,
        "optimality-lower-bound",
        ok == total && with_bad > 0,
        format!(
            "{}; {with_bad} runs with a verified bad input in X_Z",
            summary(ok, total, &first, "runs")
        ),
    ));

    // 7
    let adversarial = |o: &Outcome| !o.label.contains("honest");
    let (ok, total, first) = from_checks(&outcomes, &["verification_semantics"], adversarial);
    lines.push(criterion(
        7,
        "verification-semantics",
        ok == total,
        summary(ok, total, &first, "adversarial runs"),
    ));

    // 8
    let early = |o: &Outcome| o.unverified_early;
    let (ok, total, first) = from_checks(
        &outcomes,
        &["unverified_columns", "unverified_exclusion"],
        early,
    );
    lines.push(criterion(
        8,
        "unverified-columns",
        ok == total && total > 0,
        summary(ok, total, &first, "runs with an unverified node"),
    ));

    // 9
    let (g_ok, g_total, g_first) = oracle_cases(150);
    let iz_ok = outcomes.iter().filter(|o| o.i_z_oracle).count();
    let iz_first = outcomes
        .iter()
        .find(|o| !o.i_z_oracle)
        .map(|o| o.label.clone());
    lines.push(criterion(
        9,
        "oracle-equivalence",
        g_ok == g_total && iz_ok == outcomes.len() && g_total + outcomes.len() >= 500,
        format!(
            "geometry {g_ok}/{g_total}, I_Z {iz_ok}/{}{}{}",
            outcomes.len(),
            g_first
                .map(|f| format!("; first failure {f}"))
                .unwrap_or_default(),
            iz_first
                .map(|f| format!("; I_Z mismatch {f}"))
                .unwrap_or_default()
        ),
    ));

    // 10
    let pairs: Vec<bool> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let cfg = make_config(i as usize % CONFIGS.len(), 1000 + i);
            match (run(&cfg), run(&cfg)) {
                (Ok(a), Ok(b)) => a.to_jsonl() == b.to_jsonl(),
                _ => false,
            }
        })
        .collect();
    let same = pairs.iter().filter(|b| **b).count();
    lines.push(criterion(
        10,
        "determinism",
        same == 20,
        format!("{same}/20 configs byte-identical"),
    ));

    for l in &lines {
        println!("{}", l.text);
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    if lines.iter().all(|l| l.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
