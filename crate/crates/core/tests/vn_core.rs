use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use l2lab::linalg::{c64, CMat};
use l2lab::vn_core::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Mahler measure by Jensen's formula: log|a_top| + Σ log max(1, |root|),
/// roots from the companion matrix.
fn jensen(coeffs_low_to_high: &[f64]) -> f64 {
    let n = coeffs_low_to_high.len() - 1;
    let lead = coeffs_low_to_high[n];
    if n == 0 {
        return lead.abs().ln();
    }
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -coeffs_low_to_high[i] / lead;
    }
    let roots = comp.complex_eigenvalues();
    lead.abs().ln() + roots.iter().map(|r| r.norm().max(1.0).ln()).sum::<f64>()
}

fn circulant_shift(n: usize) -> EquivariantOperator {
    let g = GroupSpec::cyclic(n).unwrap();
    EquivariantOperator::group_ring(g, &[(Elem::g(1), c64(1.0, 0.0)), (Elem::g(0), c64(-1.0, 0.0))]).unwrap()
}

#[test]
fn trace_of_identity_is_vn_dimension() {
    let op = EquivariantOperator::identity(GroupSpec::cyclic(4).unwrap(), 3, 2);
    assert_relative_eq!(vn_trace(&op, true).unwrap(), 6.0);
    let z = EquivariantOperator::zero(GroupSpec::integers(), 2, 2, 1);
    assert_eq!(vn_trace(&z, false).unwrap(), 0.0);
}

#[test]
fn trace_of_group_ring_projection() {
    let g = GroupSpec::cyclic(2).unwrap();
    let p = EquivariantOperator::group_ring(g, &[(Elem::g(0), c64(0.5, 0.0)), (Elem::g(1), c64(0.5, 0.0))]).unwrap();
    assert_relative_eq!(vn_trace(&p, true).unwrap(), 0.5, epsilon = 1e-14);
    assert_relative_eq!(vn_trace_realized(&p).unwrap().re, 0.5, epsilon = 1e-14);
}

#[test]
fn non_square_trace_rejected() {
    let op = EquivariantOperator::zero(GroupSpec::trivial(), 1, 2, 1);
    assert!(vn_trace(&op, false).is_err());
}

#[test]
fn realizations_of_small_operators() {
    let g = GroupSpec::cyclic(2).unwrap();
    let two = EquivariantOperator::scalar(g, 1, 1, c64(2.0, 0.0));
    assert_eq!(two.realize().matrix().unwrap(), CMat::identity(2, 2) * c64(2.0, 0.0));

    let t = 0.7;
    let m = EquivariantOperator::laurent(&[(1, 1.0), (0, -1.0)]).realize().at(t);
    assert_relative_eq!((m[(0, 0)] - (c64(t.cos(), t.sin()) - c64(1.0, 0.0))).norm(), 0.0, epsilon = 1e-15);

    let g3 = GroupSpec::cyclic(3).unwrap();
    let op = EquivariantOperator::group_ring(g3, &[(Elem::g(1), c64(1.0, 0.0)), (Elem::g(2), c64(1.0, 0.0))]).unwrap();
    let mut eig: Vec<f64> = op.realize().matrix().unwrap().map(|z| z.re).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    assert_relative_eq!(eig[0], -1.0, epsilon = 1e-12);
    assert_relative_eq!(eig[1], -1.0, epsilon = 1e-12);
    assert_relative_eq!(eig[2], 2.0, epsilon = 1e-12);
}

#[test]
fn finite_fk_det_matches_eigenvalue_product() {
    for n in 2..=12usize {
        let d = fk_det(&circulant_shift(n)).unwrap();
        // ∏_{k≠0} |ω^k − 1| = n.
        let oracle: f64 = (1..n).map(|k| (2.0 * (PI * k as f64 / n as f64).sin()).ln()).sum::<f64>() / n as f64;
        assert_relative_eq!(d.log_det, oracle, epsilon = 1e-13);
        assert_relative_eq!(d.det(), (n as f64).powf(1.0 / n as f64), epsilon = 1e-12);
    }
}

#[test]
fn laurent_fk_det_matches_jensen() {
    let d = fk_det(&EquivariantOperator::laurent(&[(1, 1.0), (0, -2.0)])).unwrap();
    assert_relative_eq!(d.log_det, jensen(&[-2.0, 1.0]), epsilon = 1e-8);
    let lap = EquivariantOperator::laurent(&[(-1, -1.0), (0, 2.0), (1, -1.0)]);
    let d = fk_det(&lap).unwrap();
    assert_relative_eq!(d.log_det, jensen(&[-1.0, 2.0, -1.0]), epsilon = 1e-7);
    let p = EquivariantOperator::laurent(&[(0, 1.0), (1, 3.0), (2, -0.5), (3, 2.0)]);
    assert_relative_eq!(fk_det(&p).unwrap().log_det, jensen(&[1.0, 3.0, -0.5, 2.0]), epsilon = 1e-7);
}

#[test]
fn identity_and_zero_densities() {
    let id = EquivariantOperator::identity(GroupSpec::cyclic(3).unwrap(), 2, 1);
    let sd = spectral_density(&id, Some(&[0.0, 0.5, 1.0, 2.0])).unwrap();
    assert_eq!(sd.samples.iter().map(|s| s.1).collect::<Vec<_>>(), vec![0.0, 0.0, 2.0, 2.0]);
    assert!(sd.alpha.is_gap());

    let z = EquivariantOperator::zero(GroupSpec::integers(), 1, 1, 1);
    let sd = spectral_density(&z, Some(&[0.0, 1.0])).unwrap();
    assert_eq!(sd.kernel_dim, 1.0);
    assert!(sd.samples.iter().all(|s| s.1 == 1.0));
}

#[test]
fn shift_density_is_linear_near_zero() {
    let op = EquivariantOperator::laurent(&[(1, 1.0), (0, -1.0)]);
    let sd = spectral_density(&op, Some(&[0.0, 1e-2, 2e-2, 5e-2])).unwrap();
    assert_eq!(sd.kernel_dim, 0.0);
    // measure of {2|sin(θ/2)| ≤ λ} is (2/π)·asin(λ/2).
    for &(l, f) in &sd.samples[1..] {
        assert_relative_eq!(f, 2.0 / PI * (l / 2.0).asin(), max_relative = 1e-3);
    }
}

#[test]
fn novikov_shubin_exponents() {
    let a = spectral_density(&EquivariantOperator::laurent(&[(1, 1.0), (0, -1.0)]), None).unwrap().alpha;
    assert!((a.value().unwrap() - 1.0).abs() < 0.1, "{a:?}");
    let lap = EquivariantOperator::laurent(&[(-1, -1.0), (0, 2.0), (1, -1.0)]);
    let a = spectral_density(&lap, None).unwrap().alpha;
    assert!((a.value().unwrap() - 0.5).abs() < 0.1, "{a:?}");
    assert!(spectral_density(&circulant_shift(5), None).unwrap().alpha.is_gap());
    assert!(spectral_density(&EquivariantOperator::laurent(&[(1, 1.0), (0, -2.0)]), None).unwrap().alpha.is_gap());
}

#[test]
fn cyclic_approximation_of_laurent_determinants() {
    let z2 = fk_det(&EquivariantOperator::laurent(&[(1, 1.0), (0, -2.0)])).unwrap().log_det;
    let g = GroupSpec::cyclic(4096).unwrap();
    let op = EquivariantOperator::group_ring(g, &[(Elem::g(1), c64(1.0, 0.0)), (Elem::g(0), c64(-2.0, 0.0))]).unwrap();
    assert!((fk_det(&op).unwrap().det() - z2.exp()).abs() < 1e-3);
}

#[test]
fn table_group_matches_cyclic_backend() {
    let n = 5;
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let gt = GroupSpec::from_table(table).unwrap();
    let terms = [(Elem::g(1), c64(1.0, 0.5)), (Elem::g(3), c64(-2.0, 0.0)), (Elem::g(0), c64(0.3, 0.0))];
    let a = EquivariantOperator::group_ring(gt, &terms).unwrap();
    let b = EquivariantOperator::group_ring(GroupSpec::cyclic(n).unwrap(), &terms).unwrap();
    assert_relative_eq!(fk_det(&a).unwrap().log_det, fk_det(&b).unwrap().log_det, epsilon = 1e-12);
}

fn arb_cyclic_op(n: usize, m: usize) -> impl Strategy<Value = EquivariantOperator> {
    prop::collection::vec((0..n, -1.0..1.0f64, -1.0..1.0f64), 1..(3 * m * m + 2)).prop_map(move |terms| {
        let mut op = EquivariantOperator::zero(GroupSpec::cyclic(n).unwrap(), m, m, 1);
        for (idx, (g, re, im)) in terms.into_iter().enumerate() {
            let (i, j) = ((idx / m) % m, idx % m);
            op.add_term(i, j, Elem::g(g), CMat::from_element(1, 1, c64(re, im))).unwrap();
        }
        op
    })
}

fn arb_laurent_op(m: usize) -> impl Strategy<Value = EquivariantOperator> {
    prop::collection::vec((-1i64..=1, -1.0..1.0f64, -1.0..1.0f64), 1..(2 * m * m + 2)).prop_map(move |terms| {
        let mut op = EquivariantOperator::zero(GroupSpec::integers(), m, m, 1);
        for (idx, (p, re, im)) in terms.into_iter().enumerate() {
            let (i, j) = ((idx / m) % m, idx % m);
            op.add_term(i, j, Elem::z(p), CMat::from_element(1, 1, c64(re, im))).unwrap();
        }
        op
    })
}

/// Shifts an operator so that it is comfortably invertible.
fn shifted(op: &EquivariantOperator, s: f64) -> EquivariantOperator {
    let id = EquivariantOperator::scalar(op.group().clone(), op.source_rank(), op.fiber_dim(), c64(s, 0.0));
    op.add(&id).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_is_linear_tracial_and_positive(f in arb_cyclic_op(3, 2), g in arb_cyclic_op(3, 2)) {
        let tr = |o: &EquivariantOperator| vn_trace_complex(o).unwrap();
        prop_assert!((tr(&f.add(&g).unwrap()) - tr(&f) - tr(&g)).norm() < 1e-10);
        prop_assert!((tr(&f.compose(&g).unwrap()) - tr(&g.compose(&f).unwrap())).norm() < 1e-10);
        let ff = f.adjoint().compose(&f).unwrap();
        prop_assert!(vn_trace(&ff, true).unwrap() >= -1e-12);
        prop_assert!((tr(&ff) - vn_trace_realized(&ff).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn laurent_trace_identities(f in arb_laurent_op(2), g in arb_laurent_op(2)) {
        let tr = |o: &EquivariantOperator| vn_trace_realized(o).unwrap();
        prop_assert!((tr(&f.compose(&g).unwrap()) - tr(&g.compose(&f).unwrap())).norm() < 1e-6);
        prop_assert!((tr(&f) - vn_trace_complex(&f).unwrap()).norm() < 1e-6);
    }

    #[test]
    fn density_is_monotone_and_reaches_dimension(f in arb_cyclic_op(4, 2)) {
        let sd = spectral_density(&f, None).unwrap();
        prop_assert!(sd.samples.windows(2).all(|w| w[0].1 <= w[1].1));
        prop_assert!((sd.samples.last().unwrap().1 - sd.vn_dim).abs() < 1e-12);
        prop_assert!(sd.alpha.is_gap());
    }

    #[test]
    fn finite_determinant_is_multiplicative(f in arb_cyclic_op(3, 2), g in arb_cyclic_op(3, 2)) {
        let (f, g) = (shifted(&f, 4.0), shifted(&g, 4.0));
        let fg = f.compose(&g).unwrap();
        let l = |o: &EquivariantOperator| fk_det(o).unwrap().log_det;
        prop_assert!((l(&fg) - l(&f) - l(&g)).abs() < 1e-8);
        prop_assert!((l(&f.adjoint()) - l(&f)).abs() < 1e-10);
        prop_assert!((l(&f.adjoint().compose(&f).unwrap()) - 2.0 * l(&f)).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn laurent_determinant_is_multiplicative(f in arb_laurent_op(1), g in arb_laurent_op(1)) {
        let l = |o: &EquivariantOperator| fk_det(o).unwrap().log_det;
        let fg = f.compose(&g).unwrap();
        prop_assert!((l(&fg) - l(&f) - l(&g)).abs() < 1e-5);
        prop_assert!((l(&f.adjoint()) - l(&f)).abs() < 1e-5);
    }
}

#[test]
fn laurent_matrix_determinant_multiplicative() {
    let mut f = EquivariantOperator::zero(GroupSpec::integers(), 2, 2, 1);
    let mut g = f.clone();
    let one = |x: f64| CMat::from_element(1, 1, c64(x, 0.0));
    f.add_term(0, 0, Elem::z(1), one(1.0)).unwrap();
    f.add_term(0, 1, Elem::z(0), one(0.5)).unwrap();
    f.add_term(1, 1, Elem::z(-1), one(-3.0)).unwrap();
    f.add_term(1, 0, Elem::z(0), one(1.0)).unwrap();
    g.add_term(0, 0, Elem::z(0), one(2.0)).unwrap();
    g.add_term(1, 0, Elem::z(1), one(1.0)).unwrap();
    g.add_term(1, 1, Elem::z(0), one(1.0)).unwrap();
    let l = |o: &EquivariantOperator| fk_det(o).unwrap().log_det;
    let fg = f.compose(&g).unwrap();
    assert!((l(&fg) - l(&f) - l(&g)).abs() < 1e-5);
    assert!((l(&f.adjoint().compose(&f).unwrap()) - 2.0 * l(&f)).abs() < 1e-5);
    let _ = TAU;
}
