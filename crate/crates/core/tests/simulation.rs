mod common;

use common::*;
use polling_core::approx;
use polling_core::experiments::{
    classify_exact, enumerate_testbed, materialize_case, run_comparison, ComparisonConfig, ErrorReport, ExactClass,
    Oracle, TestBedCase,
};
use polling_core::{simulate, Discipline, Method, SimConfig};

fn short(seed: u64) -> SimConfig {
    SimConfig {
        warmup_cycles: 2_000,
        measured_cycles: 20_000,
        replications: 4,
        batch_count: 10,
        base_seed: seed,
        ..SimConfig::default()
    }
}

#[test]
fn symmetric_confidence_intervals_are_calibrated() {
    let spec = symmetric_spec(2, Discipline::Exhaustive, 0.5, 1.0, 0.3);
    let exact = symmetric_wait(&spec);
    let runs = 30;
    let covered = (0..runs)
        .filter(|&s| {
            let est = simulate(&spec, &short(1_000 + s)).unwrap();
            (est.queues[0].mean_wait - exact).abs() < est.queues[0].ci_half_width
        })
        .count();
    println!("covered {covered}/{runs}");
    assert!(covered as f64 >= 0.93 * runs as f64, "only {covered} of {runs} intervals cover the exact value");
}

#[test]
fn two_queue_constraint_case_is_exact() {
    let case = enumerate_testbed()
        .into_iter()
        .find(|c| {
            c.scv_a == 1.0
                && classify_exact(&materialize_case(c, Discipline::Exhaustive).unwrap())
                    == Some(ExactClass::TwoQueueConstraint)
        })
        .unwrap();
    let spec = materialize_case(&case, Discipline::Exhaustive).unwrap();
    let app = approx::mean_wait(&spec, Method::Interpolation).unwrap();
    let est = simulate(&spec, &SimConfig::default()).unwrap();
    for (a, e) in app.mean_waits().iter().zip(&est.queues) {
        println!("app {a:.6} sim {:.6} +- {:.6}", e.mean_wait, e.ci_half_width);
        assert!((a - e.mean_wait).abs() < e.ci_half_width);
        assert!(e.ci_half_width < 0.01 * e.mean_wait);
    }
}

#[test]
fn simulated_waits_satisfy_conservation_law() {
    let case = TestBedCase {
        n_queues: 3,
        rho: 0.7,
        scv_a: 1.0,
        scv_b: 0.25,
        scv_s: 1.0,
        imbalance_a: 5.0,
        imbalance_b: 5.0,
        switch_service_ratio: 1.0,
    };
    for d in [Discipline::Exhaustive, Discipline::Gated] {
        let spec = materialize_case(&case, d).unwrap();
        let est = simulate(&spec, &SimConfig::default()).unwrap();
        let weighted: f64 = est.queues.iter().enumerate().map(|(i, q)| spec.queue_load(i) * q.mean_wait).sum();
        let ci: f64 = est.queues.iter().enumerate().map(|(i, q)| spec.queue_load(i) * q.ci_half_width).sum();
        let rhs = pcl_rhs(&spec);
        println!("{d}: sum rho W = {weighted:.5} +- {ci:.5}, law {rhs:.5}");
        assert!((weighted - rhs).abs() < ci);
    }
}

#[test]
fn gated_vacation_model_matches_closed_form() {
    // Gated single queue: ρ/(1-ρ) E[B_res] + E[S_res] + ρ E[S] / (1 - ρ).
    let spec = vacation_spec(Discipline::Gated, 0.5);
    let exact = 0.5 / 0.5 * 1.0 + 0.5 + 0.5 / 0.5;
    let app = approx::mean_wait(&spec, Method::Interpolation).unwrap().mean_waits()[0];
    assert!(rel_close(app, exact, 1e-12));
    let est = simulate(&spec, &short(5)).unwrap();
    assert!((est.queues[0].mean_wait - exact).abs() < est.queues[0].ci_half_width);
}

#[test]
fn tables_rebuild_exactly_from_raw_csv() {
    let cases: Vec<TestBedCase> = enumerate_testbed()
        .into_iter()
        .filter(|c| c.rho == 0.3 && c.switch_service_ratio == 1.0 && c.scv_b == 1.0 && c.imbalance_b == 5.0)
        .collect();
    let cfg = ComparisonConfig { sim: short(3), ..ComparisonConfig::default() };
    let report = run_comparison(&cases, Discipline::Exhaustive, &Method::ALL, Oracle::Simulation, &cfg).unwrap();
    assert_eq!(report.rows.len(), Method::ALL.len() * cases.iter().map(|c| c.n_queues).sum::<usize>());
    let csv = report.to_csv().unwrap();
    let back = ErrorReport::from_csv(&csv).unwrap();
    assert_eq!(back, report);
    let a = report.standard_tables(Discipline::Exhaustive);
    let b = back.standard_tables(Discipline::Exhaustive);
    assert_eq!(a.len(), 9);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.to_csv(), y.to_csv());
        assert_eq!(x.to_text(), y.to_text());
    }
    // Same seeds, same rows.
    let again = run_comparison(&cases, Discipline::Exhaustive, &Method::ALL, Oracle::Simulation, &cfg).unwrap();
    assert_eq!(again, report);
}
