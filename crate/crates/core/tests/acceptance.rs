//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! re-checks the measured quantities against their thresholds.

use degenpop::selftest::{run_suite, summary_line, write_suite, CriterionOutcome};

fn metric(o: &CriterionOutcome, name: &str) -> f64 {
    *o.metrics.get(name).unwrap_or_else(|| panic!("criterion {} lacks metric {name}", o.id))
}

fn thresholds_hold(o: &CriterionOutcome) -> bool {
    let m = |name| metric(o, name);
    match o.id {
        1 => m("max_relative_residual") <= 1e-10,
        2 => ["boundary", "interior"]
            .iter()
            .all(|s| metric(o, &format!("{s}_relative_residual")) <= 1e-2 && metric(o, &format!("{s}_cg_iters")) <= 300.0),
        3 => ["boundary", "interior"].iter().all(|s| {
            metric(o, &format!("{s}_handover_norm")) <= metric(o, &format!("{s}_initial_norm"))
                && metric(o, &format!("{s}_relative_residual")) <= 1e-2
        }),
        4 => m("symmetry_defect") <= 1e-12 && m("psd_defect") <= 1e-12 && m("gradient_error") <= 1e-6,
        5 => m("sup_ratio") <= 4.2 && m("unit_exponent_deviation") <= 0.01,
        6 => m("max_relative_increment") <= 1e-12,
        7 => ["boundary0", "boundary1", "interior", "nondegenerate", "local_boundary0"].iter().all(|v| {
            let drift = metric(o, &format!("{v}_drift"));
            let c = metric(o, &format!("{v}_constant_65"));
            drift <= 2.0 && c.is_finite() && c > 0.0
        }),
        8 => ["boundary", "interior"].iter().all(|s| {
            let c = metric(o, &format!("{s}_constant_65"));
            metric(o, &format!("{s}_drift")) <= 2.0 && c.is_finite() && c > 0.0
        }),
        9 => m("time_order_min") >= 1.9 && m("space_order_min") >= 1.9 && m("characteristics_order_min") >= 1.0,
        10 => m("mismatched_artifacts") == 0.0 && m("artifacts") > 0.0,
        _ => false,
    }
}

#[test]
fn acceptance_criteria() {
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let suite = run_suite(jobs);
    assert_eq!(suite.outcomes.len(), 10);
    let mut failed = Vec::new();
    for o in &suite.outcomes {
        let ok = o.pass && thresholds_hold(o);
        println!("{}", summary_line(o).replacen(if o.pass { "PASS" } else { "FAIL" }, if ok { "PASS" } else { "FAIL" }, 1));
        if !ok {
            failed.push(o.id);
        }
    }

    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_suite(&suite, a.path()).unwrap();
    write_suite(&suite, b.path()).unwrap();
    let read = |dir: &std::path::Path| std::fs::read(dir.join("acceptance.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
