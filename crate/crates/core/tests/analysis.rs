use bcc_core::adversary::{AdversaryStrategy, SchedulerPolicy};
use bcc_core::analysis::{build_matrix, check_suite, compute_i_z, TraceView};
use bcc_core::protocol::Params;
use bcc_core::rbcast::NodeId;
use bcc_core::scalar::rational_ratio;
use bcc_core::sim::{run, ExecutionConfig, ExecutionTrace, TraceEvent};
use bcc_core::{Point, Polytope};
use num_traits::Zero;

fn p1(x: i64) -> Point {
    Point::new(vec![rational_ratio(x, 1)])
}

fn p2(x: i64, y: i64) -> Point {
    Point::new(vec![rational_ratio(x, 1), rational_ratio(y, 1)])
}

fn params(n: usize, f: usize, d: usize, upper: i64) -> Params {
    Params {
        n,
        f,
        d,
        epsilon: rational_ratio(1, 10),
        upper: rational_ratio(upper, 1),
        lower: rational_ratio(0, 1),
    }
}

fn config(params: Params, inputs: Vec<Point>, seed: u64) -> ExecutionConfig {
    ExecutionConfig {
        params,
        inputs,
        faulty: Default::default(),
        scheduler: SchedulerPolicy {
            seed,
            ..SchedulerPolicy::default()
        },
    }
}

fn assert_all_pass(trace: &ExecutionTrace) {
    let report = check_suite(trace);
    let failed: Vec<_> = report.failures().collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn honest_run_passes_every_check() {
    let cfg = config(params(5, 0, 1, 9), [1, 2, 5, 9, 3].map(p1).to_vec(), 3);
    assert_all_pass(&run(&cfg).unwrap());
}

#[test]
fn honest_two_dimensional_run_passes() {
    let inputs = vec![p2(0, 0), p2(4, 0), p2(0, 4), p2(4, 4), p2(2, 1), p2(1, 3)];
    let cfg = config(params(6, 1, 2, 4), inputs, 8);
    assert_all_pass(&run(&cfg).unwrap());
}

#[test]
fn all_fault_free_full_sets_give_uniform_rows() {
    let mut cfg = config(params(5, 0, 1, 9), [1, 2, 5, 9, 3].map(p1).to_vec(), 0);
    cfg.scheduler.sv_prefix = bcc_core::adversary::PrefixRule::Fixed {
        lengths: vec![5; 5],
    };
    let view = TraceView::new(&run(&cfg).unwrap());
    let m = build_matrix(&view, 1).unwrap().matrix;
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(*m.get(i, j), rational_ratio(1, 5));
        }
    }
}

#[test]
fn malformed_node_column_vanishes() {
    let mut cfg = config(params(5, 1, 1, 9), [1, 2, 5, 9, 3].map(p1).to_vec(), 4);
    cfg.faulty
        .insert(NodeId(5), AdversaryStrategy::MalformedPolytope { round: 1 });
    let trace = run(&cfg).unwrap();
    assert_all_pass(&trace);
    let view = TraceView::new(&trace);
    assert!(view.unverified(0).contains(&NodeId(5)));
    let mut product = bcc_core::analysis::Matrix::identity(5);
    for t in 1..=view.t_end {
        product = build_matrix(&view, t).unwrap().matrix.mul(&product);
        for i in view.accounted(t) {
            assert!(product.get(i.index(), 4).is_zero());
        }
    }
}

#[test]
fn verified_bad_input_lands_in_common_inputs() {
    let mut cfg = config(params(5, 1, 1, 100), [1, 2, 5, 9, 100].map(p1).to_vec(), 6);
    cfg.faulty
        .insert(NodeId(5), AdversaryStrategy::HonestBadInput);
    cfg.scheduler.sv_prefix = bcc_core::adversary::PrefixRule::Fixed {
        lengths: vec![5; 5],
    };
    let trace = run(&cfg).unwrap();
    assert_all_pass(&trace);
    let i_z = compute_i_z(&TraceView::new(&trace)).unwrap();
    assert_eq!(
        i_z,
        Polytope::interval(rational_ratio(2, 1), rational_ratio(9, 1))
    );
}

#[test]
fn tampered_state_fails_matrix_form_at_that_round() {
    let cfg = config(params(5, 1, 1, 9), [1, 2, 5, 9, 3].map(p1).to_vec(), 12);
    let mut trace = run(&cfg).unwrap();
    let target = 3;
    for r in &mut trace.records {
        if let TraceEvent::HCompute { node, round, h } = &mut r.event {
            if *node == NodeId(2) && *round == target {
                *h = h.scale(&rational_ratio(1, 2));
            }
        }
    }
    let report = check_suite(&trace);
    let form = report.get("matrix_form").unwrap();
    assert!(!form.pass);
    assert_eq!(form.witness["round"], target);
    assert!(!report.get("replay").unwrap().pass);
}
