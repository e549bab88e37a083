use approx::assert_relative_eq;
use l2lab::gen::{random_metric, random_morse_system, random_orbit_metrics, seeded, GenConfig};
use l2lab::linalg::{c64, log_det_hpd, real_diag, CMat};
use l2lab::morse_smale::*;
use l2lab::relative_anomaly::cellular_circle;
use l2lab::vn_core::{Elem, GroupSpec};
use proptest::prelude::*;

fn scalar(v: f64) -> CMat {
    real_diag(&[v])
}

/// `x → y` over the trivial group with incidence `n`.
fn segment(n: i64, hx: f64, hy: f64) -> MorseSystem {
    let g = GroupSpec::trivial();
    let mut ms = MorseSystem::new(g.clone(), Representation::trivial(&g, 1));
    let x = ms.add_orbit(CriticalOrbit::new("x", 0, scalar(hx)));
    let y = ms.add_orbit(CriticalOrbit::new("y", 1, scalar(hy)));
    ms.add_incidence(x, y, &[(Elem::default(), n)]);
    ms
}

#[test]
fn segment_torsion_with_metrics() {
    let ms = segment(3, 5.0, 2.0);
    let expected = -(3f64.ln() + 0.5 * 2f64.ln() - 0.5 * 5f64.ln());
    assert_relative_eq!(ms.ms_torsion().unwrap(), expected, epsilon = 1e-12);
    assert_eq!(ms.euler_characteristics(), (0, 0));
    assert_eq!(ms.morse_counts(), vec![1, 1]);
}

#[test]
fn cellular_circle_torsion_is_minus_mahler_measure() {
    for (lambda, cells) in [(2.0, 1), (2.0, 3), (0.5, 2), (-3.0, 4)] {
        let ms = cellular_circle(&scalar(lambda), cells).unwrap();
        let expected = -f64::max(1.0, f64::abs(lambda)).ln();
        assert_relative_eq!(ms.ms_torsion().unwrap(), expected, epsilon = 1e-9);
    }
}

#[test]
fn unitary_holonomy_gives_zero_torsion() {
    let rho = CMat::from_element(1, 1, c64((1.0f64).cos(), (1.0f64).sin()));
    let ms = cellular_circle(&rho, 2).unwrap();
    assert!(ms.ms_torsion().unwrap().abs() < 1e-9);
}

#[test]
fn incidence_between_equal_indices_is_rejected() {
    let mut ms = segment(1, 1.0, 1.0);
    let z = ms.add_orbit(CriticalOrbit::new("z", 1, scalar(1.0)));
    ms.add_incidence(1, z, &[(Elem::default(), 1)]);
    assert!(ms.check_ms_axioms().is_err());
    assert!(ms.build_ms_complex().is_err());
}

#[test]
fn boundary_squared_nonzero_is_rejected() {
    let mut ms = segment(1, 1.0, 1.0);
    let w = ms.add_orbit(CriticalOrbit::new("w", 2, scalar(1.0)));
    ms.add_incidence(1, w, &[(Elem::default(), 1)]);
    let errs = ms.check_ms_axioms().unwrap_err();
    assert!(!errs.is_empty());
}

#[test]
fn duplicate_labels_are_rejected() {
    let mut ms = segment(1, 1.0, 1.0);
    ms.add_orbit(CriticalOrbit::new("x", 0, scalar(1.0)));
    assert!(ms.check_ms_axioms().is_err());
}

#[test]
fn generator_images_must_satisfy_relations() {
    let g = GroupSpec::cyclic(3).unwrap();
    let bad = Representation::from_generators(&g, 1, &[("g".into(), Elem::g(1), scalar(-1.0))], None);
    assert!(bad.is_err());
    let w = c64(-0.5, 3f64.sqrt() / 2.0);
    let good = Representation::from_generators(&g, 1, &[("g".into(), Elem::g(1), CMat::from_element(1, 1, w))], None).unwrap();
    assert_relative_eq!(good.image(Elem::g(2))[(0, 0)].re, (w * w).re, epsilon = 1e-14);
}

#[test]
fn holonomy_must_commute_with_finite_factor() {
    let g = GroupSpec::cyclic(2).unwrap().product(&GroupSpec::integers()).unwrap();
    let s = real_diag(&[1.0, -1.0]);
    let z = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
    assert!(Representation::from_generators(&g, 2, &[("g".into(), Elem::g(1), s)], Some(z)).is_err());
}

#[test]
fn words_transport_along_generators() {
    let rep = Representation::holonomy(scalar(3.0)).unwrap();
    let word = parse_word("z z z^-1 z");
    assert_eq!(word.len(), 4);
    assert_eq!(word[2], Letter::inv("z"));
    assert_relative_eq!(parallel_transport(&word, &rep).unwrap()[(0, 0)].re, 9.0, epsilon = 1e-12);
    assert!(parallel_transport(&parse_word("w"), &rep).is_err());
}

#[test]
fn subdivision_with_transported_metrics_has_zero_omega() {
    let ms = cellular_circle(&scalar(2.0), 1).unwrap();
    let scheme = SubdivisionScheme {
        children: vec![Child::new("y", 0, 0, parse_word("z"), scalar(7.0)), Child::new("r", 1, 0, Vec::new(), scalar(1.0))],
        incidence: vec![
            ("v0".into(), "r".into(), vec![(Elem::default(), 1)]),
            ("y".into(), "r".into(), vec![(Elem::default(), -1)]),
            ("y".into(), "e0".into(), vec![(Elem::default(), 1)]),
            ("v0".into(), "e0".into(), vec![(Elem::z(1), -1)]),
        ],
    };
    let (refined, omega) = ms.subdivide(&scheme).unwrap();
    assert_eq!(refined.orbits.len(), 4);
    // h(y) = 7 against the transported 1/4
    assert_relative_eq!(omega[2], 7f64.ln() + 4f64.ln(), epsilon = 1e-12);
    let transported = ms.transported_metrics(&scheme).unwrap();
    let (_, omega) = ms
        .subdivide(&SubdivisionScheme {
            children: scheme.children.iter().zip(&transported[2..]).map(|(c, h)| Child { metric: h.clone(), ..c.clone() }).collect(),
            incidence: scheme.incidence.clone(),
        })
        .unwrap();
    assert!(omega.iter().all(|w| w.abs() < 1e-12));
}

#[test]
fn subdivision_rejects_children_below_parent_index() {
    let ms = segment(1, 1.0, 1.0);
    let scheme = SubdivisionScheme { children: vec![Child::new("u", 0, 1, Vec::new(), scalar(1.0))], incidence: Vec::new() };
    assert!(scheme.check(&ms).is_err());
    let stale = SubdivisionScheme { children: vec![Child::new("x", 1, 0, Vec::new(), scalar(1.0))], incidence: Vec::new() };
    assert!(stale.check(&ms).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metric_anomaly_matches_torsion_change(seed in any::<u64>(), acyclic in any::<bool>()) {
        let mut rng = seeded(seed);
        let ms = random_morse_system(&mut rng, &GenConfig::default(), acyclic).unwrap();
        let h1 = random_orbit_metrics(&mut rng, &ms);
        let h2 = random_orbit_metrics(&mut rng, &ms);
        let direct = ms.metric_anomaly(&h1, &h2).unwrap();
        let via = ms.metric_anomaly_via_torsion(&h1, &h2).unwrap();
        prop_assert!((direct - via).abs() < 1e-7 * (1.0 + direct.abs()), "{} vs {}", direct, via);
    }

    #[test]
    fn orientation_flips_leave_torsion_unchanged(seed in any::<u64>(), which in any::<prop::sample::Index>()) {
        let mut rng = seeded(seed);
        let ms = random_morse_system(&mut rng, &GenConfig::default(), true).unwrap();
        prop_assume!(!ms.orbits.is_empty());
        let mut flipped = ms.clone();
        let i = which.index(ms.orbits.len());
        flipped.orbits[i].orientation = -1;
        let (a, b) = (ms.ms_torsion().unwrap(), flipped.ms_torsion().unwrap());
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn circle_torsion_is_independent_of_cell_count(lambda in 0.1f64..6.0, cells in 1usize..6) {
        let t = cellular_circle(&scalar(lambda), cells).unwrap().ms_torsion().unwrap();
        prop_assert!((t + lambda.max(1.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn uniform_metric_scaling_of_acyclic_system(seed in any::<u64>(), s in 0.1f64..10.0) {
        let mut rng = seeded(seed);
        let ms = random_morse_system(&mut rng, &GenConfig::default(), true).unwrap();
        let scaled: Vec<CMat> = ms.metrics().iter().map(|h| h.scale(s)).collect();
        let a = ms.ms_torsion().unwrap();
        let b = ms.with_metrics(&scaled).unwrap().ms_torsion().unwrap();
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()));
    }

    #[test]
    fn anomaly_of_a_single_orbit_is_log_det_ratio(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let h1 = random_metric(&mut rng, 2);
        let h2 = random_metric(&mut rng, 2);
        let g = GroupSpec::trivial();
        let mut ms = MorseSystem::new(g.clone(), Representation::trivial(&g, 2));
        ms.add_orbit(CriticalOrbit::new("p", 1, h1.clone()));
        let a = ms.metric_anomaly(std::slice::from_ref(&h1), std::slice::from_ref(&h2)).unwrap();
        prop_assert!((a + log_det_hpd(&h2) - log_det_hpd(&h1)).abs() < 1e-10);
    }
}
