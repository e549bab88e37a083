use std::f64::consts::LN_2;

use approx::assert_relative_eq;
use l2lab::analytic_1d::OneDSystem;
use l2lab::linalg::real_diag;
use l2lab::relative_anomaly::*;
use l2lab::schema::OneDSchema;

#[test]
fn rhs_of_boundary_formula() {
    assert_relative_eq!(main_theorem_rhs(2, 1, 0.0), -0.5 * LN_2);
    assert_relative_eq!(main_theorem_rhs(2, 3, 0.4), -1.5 * LN_2 - 0.2);
    assert_eq!(main_theorem_rhs(0, 5, 0.0), 0.0);
    assert_relative_eq!(relative_torsion(1.0, 0.25, -0.5), 1.25);
}

#[test]
fn theorem_ids_round_trip_through_names() {
    for id in TheoremId::ALL {
        assert_eq!(TheoremId::parse(id.name()), Some(id));
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{}\"", id.name()));
        assert!(id.tolerance() > 0.0);
    }
    assert_eq!(TheoremId::parse("no_such_identity"), None);
}

#[test]
fn interval_example_passes() {
    let checks = run_theorem_suite(&SuiteConfig::interval_example());
    assert_eq!(checks.len(), 1);
    let c = &checks[0];
    assert_eq!(c.id, TheoremId::BoundaryFormula);
    assert!(c.pass, "{c:?}");
    assert_relative_eq!(c.rhs, -0.5 * LN_2, epsilon = 1e-15);
    assert_eq!(c.digest.len(), 64);
}

#[test]
fn default_suite_has_no_failures() {
    let checks = run_theorem_suite(&SuiteConfig { random_cases: 4, ..SuiteConfig::default() });
    assert!(!checks.is_empty());
    for c in &checks {
        assert!(matches!(c.outcome, Outcome::Pass | Outcome::OutOfScope), "{c:?}");
    }
    for id in TheoremId::ALL {
        assert!(checks.iter().any(|c| c.id == id && c.outcome == Outcome::Pass), "no passing case for {}", id.name());
    }
    let mut sorted = checks.iter().map(|c| c.id).collect::<Vec<_>>();
    sorted.sort();
    assert_eq!(sorted, checks.iter().map(|c| c.id).collect::<Vec<_>>());
}

#[test]
fn suite_is_reproducible_for_a_seed() {
    let a = run_theorem_suite(&SuiteConfig { random_cases: 3, ..SuiteConfig::combinatorial(11) });
    let b = run_theorem_suite(&SuiteConfig { random_cases: 3, ..SuiteConfig::combinatorial(11) });
    let c = run_theorem_suite(&SuiteConfig { random_cases: 3, ..SuiteConfig::combinatorial(12) });
    let digests = |v: &[TheoremCheck]| v.iter().map(|c| c.digest.clone()).collect::<Vec<_>>();
    assert_eq!(digests(&a), digests(&b));
    assert_ne!(digests(&a), digests(&c));
    assert!(a.iter().all(|c| c.pass), "{a:?}");
}

#[test]
fn config_rejects_unknown_fields_and_fills_defaults() {
    let cfg: SuiteConfig = serde_json::from_str(r#"{"theorems": ["metric_anomaly"], "seed": 3}"#).unwrap();
    assert_eq!(cfg.theorems, vec![TheoremId::MetricAnomaly]);
    assert_eq!(cfg.random_cases, SuiteConfig::default().random_cases);
    assert_eq!(cfg.systems.len(), default_systems().len());
    assert!(serde_json::from_str::<SuiteConfig>(r#"{"seeds": 3}"#).is_err());
}

#[test]
fn invalid_system_becomes_an_error_check() {
    let mut bad = OneDSchema::from_system(&OneDSystem::interval(0.0, 1.0));
    bad.base = l2lab::analytic_1d::Base::Interval { a: 1.0, b: 0.0 };
    let cfg = SuiteConfig { theorems: vec![TheoremId::BoundaryFormula], systems: vec![bad], ..SuiteConfig::default() };
    let checks = run_theorem_suite(&cfg);
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0].outcome, Outcome::Error);
    assert!(!checks[0].pass);
    assert!(checks[0].note.is_some());
}

#[test]
fn non_unimodular_circle_is_out_of_scope_for_product_metric() {
    let sys = OneDSchema::from_system(&OneDSystem::circle(1.0, real_diag(&[2.0])));
    let cfg = SuiteConfig { theorems: vec![TheoremId::ProductMetric], systems: vec![sys], ..SuiteConfig::default() };
    let checks = run_theorem_suite(&cfg);
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0].outcome, Outcome::OutOfScope);
}

#[test]
fn euler_characteristics_of_cellular_circle() {
    let ms = cellular_circle(&real_diag(&[1.0, 2.0]), 3).unwrap();
    assert_eq!(euler_characteristics(&ms), (0, 0));
    let c = ms.build_ms_complex().unwrap();
    assert_eq!(euler_characteristics(&c), (0, 0));
}

#[test]
fn checks_serialize_nan_as_null() {
    let c = TheoremCheck::out_of_scope(TheoremId::Subdivision, "x", "why", &serde_json::json!({}));
    let v = serde_json::to_value(&c).unwrap();
    assert!(v["lhs"].is_null());
    assert_eq!(v["id"], "subdivision");
    assert_eq!(v["outcome"], serde_json::to_value(Outcome::OutOfScope).unwrap());
}
