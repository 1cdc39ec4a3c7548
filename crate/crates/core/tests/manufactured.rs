use poro_core::mesh::Point;
use poro_core::verification::{
    example1, example2, example3, exactness_problem, printed_source_discrepancy, strong_residual, ManufacturedProblem,
};
use proptest::prelude::*;

fn sample(mp: &ManufacturedProblem) -> impl Strategy<Value = (Point, f64)> {
    let [x0, x1, y0, y1] = mp.domain;
    let t1 = mp.problem.final_time;
    (x0..x1, y0..y1, 0.0..t1).prop_map(|(x, y, t)| ([x, y], t))
}

fn check_residual(mp: &ManufacturedProblem) {
    let (f, phi) = (mp.problem.body_force.clone(), mp.problem.source.clone());
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(100));
    runner
        .run(&sample(mp), |(x, t)| {
            let r = strong_residual(mp, &f, &phi, x, t);
            prop_assert!(r.momentum <= 1e-8, "{} momentum residual {:e} at {:?}, t={}", mp.name, r.momentum, x, t);
            prop_assert!(r.flow <= 1e-8, "{} flow residual {:e} at {:?}, t={}", mp.name, r.flow, x, t);
            Ok(())
        })
        .unwrap();
}

#[test]
fn example1_sources_satisfy_strong_form() {
    check_residual(&example1());
}

#[test]
fn example2_sources_satisfy_strong_form() {
    check_residual(&example2());
}

#[test]
fn example3_sources_satisfy_strong_form() {
    check_residual(&example3());
}

#[test]
fn exactness_sources_satisfy_strong_form() {
    check_residual(&exactness_problem());
}

#[test]
fn residual_detects_a_wrong_source() {
    let mp = example1();
    let f = mp.problem.body_force.clone();
    let bumped: poro_core::field::ScalarFn = {
        let phi = mp.problem.source.clone();
        std::sync::Arc::new(move |x, t| phi(x, t) + 1e-3)
    };
    let r = strong_residual(&mp, &f, &bumped, [0.3, 0.6], 0.5);
    assert!(r.flow > 1e-5);
}

fn points(mp: &ManufacturedProblem) -> Vec<(Point, f64)> {
    let [x0, x1, y0, y1] = mp.domain;
    let mut out = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            let x = x0 + (x1 - x0) * (i as f64 + 0.37) / 7.0;
            let y = y0 + (y1 - y0) * (j as f64 + 0.61) / 7.0;
            out.push(([x, y], mp.problem.final_time * (i * 7 + j + 1) as f64 / 49.0));
        }
    }
    out
}

#[test]
fn printed_sources_of_example1_agree() {
    let mp = example1();
    let (f, phi) = printed_source_discrepancy(&mp, &points(&mp));
    assert!(f.unwrap() <= 1e-6 && phi.unwrap() <= 1e-6);
}

#[test]
fn printed_source_of_example2_lacks_pi() {
    let mp = example2();
    let (f, phi) = printed_source_discrepancy(&mp, &points(&mp));
    assert!(f.unwrap() <= 1e-6);
    let phi = phi.unwrap();
    assert!(phi > 1e-3, "printed source unexpectedly consistent ({phi:e})");
}

#[test]
fn printed_sources_of_example3_disagree() {
    let mp = example3();
    let (f, phi) = printed_source_discrepancy(&mp, &points(&mp));
    assert!(f.unwrap() > 1e-3);
    assert!(phi.unwrap() > 1e-3);
}

#[test]
fn printed_example3_second_force_component_agrees() {
    let mp = example3();
    let printed = mp.printed_body_force.clone().unwrap();
    for (x, t) in points(&mp) {
        let (a, b) = (printed(x, t)[1], (mp.problem.body_force)(x, t)[1]);
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1e3), "{a} vs {b}");
    }
}
