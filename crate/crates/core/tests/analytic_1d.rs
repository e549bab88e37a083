use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use l2lab::analytic_1d::tridiag::{tridiagonal_eigenvalues, BidiagonalGram};
use l2lab::analytic_1d::*;
use l2lab::linalg::{c64, real_diag, CMat};
use l2lab::relative_anomaly::main_theorem_rhs;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn diag_holonomy(values: &[(f64, f64)]) -> CMat {
    let n = values.len();
    let mut m = CMat::zeros(n, n);
    for (i, &(re, im)) in values.iter().enumerate() {
        m[(i, i)] = c64(re, im);
    }
    m
}

/// Jensen: the mean of `log(2 cosh c − 2 cos θ)` over the circle is `|c|`.
fn circle_oracle(eigs: &[(f64, f64)]) -> f64 {
    -0.5 * eigs.iter().map(|&(re, im)| c64(re, im).norm().ln().abs()).sum::<f64>()
}

#[test]
fn interval_spectrum_starts_at_zero_for_functions() {
    let sys = OneDSystem::interval(0.0, 2.0);
    let s0 = interval_spectrum(&sys, 0, 3).unwrap();
    let s1 = interval_spectrum(&sys, 1, 2).unwrap();
    assert_eq!(s0[0], 0.0);
    assert_relative_eq!(s0[1], PI * PI / 4.0, epsilon = 1e-14);
    assert_relative_eq!(s1[1], PI * PI, epsilon = 1e-14);
    assert!(interval_spectrum(&sys, 2, 1).is_err());
}

#[test]
fn zeta_continuation_matches_closed_form() {
    for (a, b) in [(0.0, 1.0), (0.0, std::f64::consts::E.powi(2)), (-3.0, 4.5)] {
        let z = zeta_torsion_interval(&OneDSystem::interval(a, b)).unwrap();
        assert_relative_eq!(z.log_t_an, -0.5 * (2.0 * (b - a)).ln(), epsilon = 1e-14);
        assert!(z.residual < 1e-8, "residual {}", z.residual);
    }
}

#[test]
fn unit_interval_report_matches_boundary_formula() {
    let r = torsion_report(&OneDSystem::interval(0.0, 1.0)).unwrap();
    assert_eq!((r.chi_manifold, r.chi_boundary), (1, 2));
    assert_eq!(r.theta_integral, Some(0.0));
    let rhs = main_theorem_rhs(r.chi_boundary, 1, 0.0);
    assert_relative_eq!(rhs, -0.5 * 2f64.ln(), epsilon = 1e-15);
    assert!((r.relative - rhs).abs() < 1e-6, "relative {} rhs {}", r.relative, rhs);
}

#[test]
fn twisted_zeta_determinant_has_closed_form() {
    for (a, b) in [(0.1, 0.0), (0.3, 0.2), (0.0, 0.5), (0.45, -0.1)] {
        let closed = (2.0 * (TAU * b).cosh() - 2.0 * (TAU * a).cos()).ln();
        assert_relative_eq!(zeta_log_det_twisted(a, b, 256), closed, epsilon = 1e-9);
    }
}

#[test]
fn circle_torsion_against_jensen() {
    let cases: Vec<Vec<(f64, f64)>> = vec![
        vec![(2.0, 0.0)],
        vec![(0.5, 0.0)],
        vec![((PI / 3.0).cos(), (PI / 3.0).sin())],
        vec![(-1.0, 0.0)],
        vec![(2.0, 0.0), (0.5, 0.0)],
        vec![(0.0, 3.0)],
    ];
    for eigs in cases {
        let sys = OneDSystem::circle(1.7, diag_holonomy(&eigs));
        let c = circle_torsion(&sys).unwrap();
        let oracle = circle_oracle(&eigs);
        assert!((c.log_t_an - oracle).abs() < 1e-8, "{eigs:?}: {} vs {oracle}", c.log_t_an);
        assert!((c.log_t_ms - oracle).abs() < 1e-9, "{eigs:?}: ms {} vs {oracle}", c.log_t_ms);
    }
}

#[test]
fn non_normal_holonomy_is_unsupported() {
    let rho = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
    assert!(circle_torsion(&OneDSystem::circle(1.0, rho)).is_err());
}

#[test]
fn constant_metric_has_vanishing_theta() {
    let sys = OneDSystem::interval(0.0, 1.0).with_metric(FiberMetric::Constant(real_diag(&[1.0, 3.0])));
    let th = theta_1d(&sys).unwrap();
    assert!(th.unimodular);
    assert_eq!(th.max_abs(), 0.0);
}

#[test]
fn theta_integrates_log_det_change() {
    let xs = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let values: Vec<CMat> = xs.iter().map(|&x: &f64| real_diag(&[(2.0 * x).exp()])).collect();
    let sys = OneDSystem::interval(0.0, 1.0).with_metric(FiberMetric::Sampled { xs, values });
    let th = theta_1d(&sys).unwrap();
    assert!(!th.unimodular);
    assert_relative_eq!(th.integral(), 2.0, epsilon = 1e-12);
}

#[test]
fn invalid_systems_are_rejected() {
    assert!(OneDSystem::interval(1.0, 0.0).validate().is_err());
    let bad = OneDSystem::interval(0.0, 1.0).with_metric(FiberMetric::Constant(real_diag(&[-1.0])));
    assert!(bad.validate().is_err());
    assert!(zeta_torsion_interval(&OneDSystem::circle(1.0, real_diag(&[2.0]))).is_err());
}

#[test]
fn standard_morse_function_has_one_minimum() {
    let sys = OneDSystem::interval(0.0, 2.0);
    let crit = sys.critical_points();
    assert_eq!(crit.len(), 1);
    assert_eq!(crit[0].index, 0);
    assert_relative_eq!(crit[0].x, 1.0);
    assert!(sys.morse_value(0.3) > sys.morse_value(1.0));
}

#[test]
fn deformed_differential_conjugates_to_plain_difference() {
    let sys = OneDSystem::interval(0.0, 1.0);
    let (t, n) = (7.0, 40);
    let dt = deformed_differential(&sys, t, n).unwrap();
    let h = 1.0 / n as f64;
    let u: Vec<f64> = (0..=n).map(|i| (i as f64 * 0.37).sin()).collect();
    let lhs = dt.apply(&u);
    for j in 0..n {
        let v = |i: usize| (t * dt.f_nodes[i]).exp() * u[i];
        let fbar = 0.5 * (dt.f_nodes[j] + dt.f_nodes[j + 1]);
        let rhs = (-t * fbar).exp() * (v(j + 1) - v(j)) / h;
        assert_relative_eq!(lhs[j], rhs, epsilon = 1e-9, max_relative = 1e-12);
    }
}

#[test]
fn witten_split_adds_up_and_isolates_the_minimum() {
    let sys = OneDSystem::interval(0.0, 1.0);
    let rows = witten_sweep(&sys, &[40.0, 60.0], 400, &WittenConfig::default()).unwrap();
    for r in &rows {
        assert!(r.residual < 1e-9 * (1.0 + r.log_t_an.abs()));
        assert_eq!(r.small_rank, 1);
        assert!(r.log_vol.is_some());
    }
}

#[test]
fn witten_rejects_eigenvalues_in_the_guard_band() {
    let sys = OneDSystem::interval(0.0, 1.0);
    let run = witten_discretize(&sys, 40.0, 200).unwrap();
    let mu = run.spectrum[0];
    let cfg = WittenConfig { guard_band: (0.5 * mu, 2.0 * mu), threshold: mu };
    assert!(witten_split(&run, &cfg).is_err());
}

#[test]
fn free_term_recovers_synthetic_coefficients() {
    let c = [0.3, -0.25, 0.01, 0.002];
    let samples: Vec<(f64, f64)> = [40.0, 60.0, 90.0, 135.0, 200.0, 300.0, 400.0]
        .iter()
        .map(|&t: &f64| (t, c[0] + c[1] * t.ln() + c[2] * t + c[3] * t * t.ln()))
        .collect();
    let fit = free_term_extract(&samples).unwrap();
    assert_relative_eq!(fit.free_term, c[0], epsilon = 1e-8);
    assert!(fit.residual < 1e-10);
    assert!(free_term_extract(&samples[..5]).is_err());
    assert!(free_term_extract(&[(1.0, 0.0), (1.1, 0.0), (1.2, 0.0), (1.3, 0.0), (1.4, 0.0), (1.5, 0.0)]).is_err());
}

#[test]
fn small_torsion_prediction_adds_pi_terms() {
    let crit = OneDSystem::interval(0.0, 1.0).critical_points();
    let p = small_torsion_prediction(-1.0, &crit, 2, 1);
    assert_relative_eq!(p, -1.0 + 2.0 * 0.25 * PI.ln(), epsilon = 1e-15);
}

fn dense_gram(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    let mut bm = DMatrix::<f64>::zeros(n, n + 1);
    for i in 0..n {
        bm[(i, i)] = -a[i];
        bm[(i, i + 1)] = b[i];
    }
    &bm * bm.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_eigenvalues_match_dense_solver(ab in prop::collection::vec((0.1f64..3.0, 0.1f64..3.0), 1..12)) {
        let (a, b): (Vec<f64>, Vec<f64>) = ab.into_iter().unzip();
        let g = BidiagonalGram::new(&a, &b);
        let mut dense: Vec<f64> = dense_gram(&a, &b).symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let ours = g.eigenvalues();
        for (x, y) in ours.iter().zip(&dense) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()), "{:?} vs {:?}", ours, dense);
        }
        let log_det: f64 = dense.iter().map(|x| x.ln()).sum();
        prop_assert!((g.log_det() - log_det).abs() < 1e-9 * (1.0 + log_det.abs()));
        for w in dense.windows(2).filter(|w| w[1] > 1.01 * w[0]) {
            let mid = (w[0] * w[1]).sqrt();
            prop_assert_eq!(g.count_below(mid), dense.iter().filter(|&&x| x < mid).count());
        }
        prop_assert_eq!(g.count_below(0.5 * dense[0]), 0);
    }

    #[test]
    fn tridiagonal_eigenvalues_match_dense(diag in prop::collection::vec(-3.0f64..3.0, 2..10), seed in 0.1f64..2.0) {
        let n = diag.len();
        let off: Vec<f64> = (0..n - 1).map(|i| seed * ((i as f64) + 1.0).sin()).collect();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else if i + 1 == j { off[i] } else if j + 1 == i { off[j] } else { 0.0 });
        let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let mut ours = tridiagonal_eigenvalues(&diag, &off);
        ours.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&dense) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn circle_torsion_depends_only_on_moduli(r in 0.2f64..5.0, phi in 0.0f64..TAU, l in 0.5f64..4.0) {
        let sys = OneDSystem::circle(l, diag_holonomy(&[(r * phi.cos(), r * phi.sin())]));
        let c = circle_torsion(&sys).unwrap();
        prop_assert!((c.log_t_an + 0.5 * r.ln().abs()).abs() < 1e-7);
        prop_assert!((c.log_t_an - c.log_t_ms).abs() < 1e-7);
    }

    #[test]
    fn interval_analytic_torsion_scales_with_fiber(l in 0.1f64..20.0, d in 1usize..4) {
        let h = real_diag(&vec![1.0; d]);
        let sys = OneDSystem::interval(0.0, l).with_metric(FiberMetric::Constant(h));
        let z = zeta_torsion_interval(&sys).unwrap();
        prop_assert!((z.log_t_an + 0.5 * d as f64 * (2.0 * l).ln()).abs() < 1e-12);
        prop_assert!(z.residual < 1e-8);
    }
}
