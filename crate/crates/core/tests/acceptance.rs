//! Acceptance run: one line per criterion. The exit status is non-zero when a
//! criterion fails that is not listed as unattainable.

use std::f64::consts::{FRAC_PI_3, LN_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use l2lab::analytic_1d::*;
use l2lab::linalg::{c64, CMat};
use l2lab::relative_anomaly::*;
use l2lab::vn_core::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn cyclic_op(n: usize, terms: &[(usize, f64)]) -> EquivariantOperator {
    let t: Vec<_> = terms.iter().map(|&(g, a)| (Elem::g(g % n), c64(a, 0.0))).collect();
    EquivariantOperator::group_ring(GroupSpec::cyclic(n).unwrap(), &t).unwrap()
}

fn suite(theorems: &[TheoremId], cases: usize, seed: u64) -> Vec<TheoremCheck> {
    run_theorem_suite(&SuiteConfig { theorems: theorems.to_vec(), seed, random_cases: cases, ..SuiteConfig::default() })
}

fn summarize(checks: &[TheoremCheck], filter: impl Fn(&TheoremCheck) -> bool) -> (usize, usize, f64) {
    let sel: Vec<_> = checks.iter().filter(|c| filter(c)).collect();
    let passed = sel.iter().filter(|c| c.pass).count();
    let worst = sel.iter().map(|c| c.residual).fold(0.0f64, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
    (passed, sel.len(), worst)
}

fn interval_zeta() -> Verdict {
    let sys = OneDSystem::interval(0.0, 1.0);
    let (z, dt) = timed(|| zeta_torsion_interval(&sys).unwrap());
    let closed = -0.5 * (LN_2 + 1f64.ln());
    let pass = (z.numeric - (-0.3465736)).abs() < 1e-6 && (z.numeric - closed).abs() < 1e-6 && dt < Duration::from_secs(1);
    verdict(pass, format!("log T^An = {:.9} from the zeta continuation, closed form {closed:.9}, {:.3} s", z.numeric, secs(dt)))
}

fn interval_metric() -> Verdict {
    let mut worst = 0.0f64;
    for l in [1.0, 2.0, std::f64::consts::E.powi(2)] {
        let met = metric_torsion_interval(&OneDSystem::interval(0.0, l)).unwrap();
        worst = worst.max((met + 0.5 * f64::ln(l)).abs());
    }
    verdict(worst < 1e-10, format!("log T^Met = -log(l)/2 for l in {{1, 2, e^2}}, worst error {worst:.2e}"))
}

fn interval_relative() -> Verdict {
    let sys = OneDSystem::interval(0.0, 1.0);
    let an = zeta_torsion_interval(&sys).unwrap().numeric;
    let met = metric_torsion_interval(&sys).unwrap();
    let ms = interval_morse_system(&sys).unwrap().ms_torsion().unwrap();
    let r = relative_torsion(an, met, ms);
    let rhs = main_theorem_rhs(2, 1, 0.0);
    let pass = (r + LN_2 / 2.0).abs() < 1e-6 && (r - rhs).abs() < 1e-6;
    verdict(pass, format!("R = {r:.9}, boundary formula {rhs:.9}, residual {:.2e}", (r - rhs).abs()))
}

fn fk_exactness() -> Verdict {
    let mut worst_cyclic = 0.0f64;
    let mut slowest = Duration::ZERO;
    for n in 2..=12usize {
        let (d, dt) = timed(|| fk_det(&cyclic_op(n, &[(1, 1.0), (0, -1.0)])).unwrap());
        slowest = slowest.max(dt);
        worst_cyclic = worst_cyclic.max((d.det() - (n as f64).powf(1.0 / n as f64)).abs());
    }
    let (z2, t2) = timed(|| fk_det(&EquivariantOperator::laurent(&[(1, 1.0), (0, -2.0)])).unwrap().det());
    let (lap, t3) = timed(|| fk_det(&EquivariantOperator::laurent(&[(-1, -1.0), (0, 2.0), (1, -1.0)])).unwrap().det());
    slowest = slowest.max(t2).max(t3);
    let pass = worst_cyclic < 1e-12 && (z2 - 2.0).abs() < 1e-4 && (lap - 1.0).abs() < 1e-4 && slowest < Duration::from_secs(1);
    verdict(
        pass,
        format!(
            "z-1 over Z/n, n <= 12: worst error {worst_cyclic:.1e}; z-2 over Z: {z2:.8}; 2-z-1/z over Z: {lap:.8}; slowest {:.3} s",
            secs(slowest)
        ),
    )
}

fn novikov_shubin_estimates() -> Verdict {
    let alpha = |op: &EquivariantOperator| spectral_density(op, None).unwrap().alpha;
    let a1 = alpha(&EquivariantOperator::laurent(&[(1, 1.0), (0, -1.0)]));
    let a2 = alpha(&EquivariantOperator::laurent(&[(-1, -1.0), (0, 2.0), (1, -1.0)]));
    let finite_gaps = (2..=6).all(|n| alpha(&cyclic_op(n, &[(1, 1.0), (0, -1.0)])).is_gap()) && alpha(&cyclic_op(4, &[(0, 1.0)])).is_gap();
    let near = |a: &Alpha, v: f64| a.value().is_some_and(|x| (x - v).abs() < 0.1);
    verdict(
        near(&a1, 1.0) && near(&a2, 0.5) && finite_gaps,
        format!("alpha(z-1) = {a1}, alpha(2-z-1/z) = {a2}, finite groups report inf+: {finite_gaps}"),
    )
}

fn chain_isomorphisms() -> Verdict {
    let (checks, dt) = timed(|| suite(&[TheoremId::TorsionComparison], 200, 2024));
    let (passed, total, worst) = summarize(&checks, |_| true);
    verdict(
        passed == 200 && total == 200 && dt < Duration::from_secs(30),
        format!("{passed}/{total} random complexes, worst residual {worst:.2e}, {:.2} s", secs(dt)),
    )
}

fn product_formula() -> Verdict {
    let checks = suite(&[TheoremId::ProductFormula], 40, 7);
    let (passed, total, worst) = summarize(&checks, |c| c.case.starts_with("random"));
    let trivial_circle = CMat::identity(1, 1);
    let circle = OneDSystem::circle(1.0, trivial_circle);
    let c = interval_morse_system(&OneDSystem::interval(0.0, 1.0)).unwrap().build_ms_complex().unwrap();
    let d = circle_morse_system(&circle).unwrap().build_ms_complex().unwrap();
    let lhs = c.tensor_product(&d).unwrap().l2_torsion().unwrap();
    let rhs = c.euler_characteristic() as f64 * d.l2_torsion().unwrap() + d.euler_characteristic() as f64 * c.l2_torsion().unwrap();
    let ic = (lhs - rhs).abs();
    verdict(
        passed == total && worst < 1e-8 && ic < 1e-8,
        format!("{passed}/{total} random pairs, worst residual {worst:.2e}; interval x circle residual {ic:.2e}"),
    )
}

fn metric_anomaly() -> Verdict {
    let checks = suite(&[TheoremId::MetricAnomaly], 100, 11);
    let (passed, total, worst) = summarize(&checks, |_| true);
    verdict(passed == 100 && total == 100, format!("{passed}/{total} random Morse systems, worst residual {worst:.2e}"))
}

fn subdivision() -> Verdict {
    let checks = suite(&[TheoremId::Subdivision], 0, 3);
    let (passed, total, worst) = summarize(&checks, |_| true);
    let intervals = checks.iter().filter(|c| c.case.contains("interval")).count();
    let circles = checks.iter().filter(|c| c.case.contains("circle")).count();
    let unimodular = checks.iter().filter(|c| c.case.contains("unimodular")).count();
    verdict(
        passed == total && worst < 1e-8 && intervals > 0 && circles > 0 && unimodular > 0,
        format!("{passed}/{total} checks ({intervals} interval, {circles} circle, {unimodular} with ω = 0), worst residual {worst:.2e}"),
    )
}

fn witten() -> Verdict {
    let sys = OneDSystem::interval(0.0, 1.0);
    let cfg = WittenConfig::default();
    let ts = [40.0, 60.0, 90.0, 135.0, 200.0, 300.0, 400.0];
    let ((rows, rank50), dt) = timed(|| {
        let rows = witten_sweep(&sys, &ts, 4000, &cfg).unwrap();
        let run = witten_discretize(&sys, 50.0, 4000).unwrap();
        (rows, witten_split(&run, &cfg).unwrap().small_rank())
    });
    let worst = rows.iter().map(|r| r.residual).fold(0.0f64, f64::max);
    let ranks_ok = rank50 == 1 && rows.iter().filter(|r| r.t >= 50.0).all(|r| r.small_rank == 1);
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.log_t_sm - r.log_vol.unwrap())).collect();
    let fit = free_term_extract(&samples).unwrap();
    let predicted = small_torsion_prediction(0.0, &sys.critical_points(), 1, 1);
    let rel = ((fit.free_term - predicted) / predicted).abs();
    verdict(
        worst < 1e-10 && ranks_ok && rel < 0.05,
        format!(
            "split residual {worst:.1e}, small rank 1 for t >= 50: {ranks_ok}, free term {:.5} vs {predicted:.5} ({:.2}%), {:.1} s",
            fit.free_term,
            100.0 * rel,
            secs(dt)
        ),
    )
}

fn cheeger_muller() -> Verdict {
    let holonomies = [c64(1.0, 0.0), c64(FRAC_PI_3.cos(), FRAC_PI_3.sin()), c64(-1.0, 0.0), c64(2.0, 0.0)];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for h in holonomies {
        let c = circle_torsion(&OneDSystem::circle(1.0, CMat::from_element(1, 1, h))).unwrap();
        worst = worst.max((c.log_t_an - c.log_t_ms).abs());
        parts.push(format!("{:.6}", c.log_t_an));
    }
    verdict(worst < 1e-3, format!("log T^An over holonomies 1, e^(i pi/3), -1, 2: [{}], worst |An - MS| {worst:.2e}", parts.join(", ")))
}

fn cyclic_convergence() -> Verdict {
    let n = 4096;
    let z2 = fk_det(&EquivariantOperator::laurent(&[(1, 1.0), (0, -2.0)])).unwrap().det();
    let lap = fk_det(&EquivariantOperator::laurent(&[(-1, -1.0), (0, 2.0), (1, -1.0)])).unwrap().det();
    let z2n = fk_det(&cyclic_op(n, &[(1, 1.0), (0, -2.0)])).unwrap().det();
    let lapn = fk_det(&cyclic_op(n, &[(n - 1, -1.0), (0, 2.0), (1, -1.0)])).unwrap().det();
    // Off the kernel, Π_{k≠0} (2 − 2cos(2πk/n)) = n².
    let exact = (n as f64).powf(2.0 / n as f64);
    let (e1, e2) = ((z2n - z2).abs(), (lapn - lap).abs());
    verdict(
        e1 < 1e-3 && e2 < 1e-3,
        format!(
            "Z/4096 against Z: z-2 off by {e1:.1e}, 2-z-1/z off by {e2:.1e}; the exact Z/4096 value of 2-z-1/z is 4096^(2/4096) = {exact:.6} (computed {lapn:.6})"
        ),
    )
}

/// Criteria that fail for every faithful implementation, with the reason.
const KNOWN_UNATTAINABLE: [(usize, &str); 1] =
    [(12, "the exact determinant of 2-z-1/z over Z/n is n^(2/n), which is within 1e-3 of 1 only for n above about 18000")];

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("interval analytic torsion", interval_zeta),
        ("interval metric torsion", interval_metric),
        ("interval relative torsion", interval_relative),
        ("Fuglede-Kadison determinants", fk_exactness),
        ("Novikov-Shubin invariants", novikov_shubin_estimates),
        ("torsion under chain isomorphisms", chain_isomorphisms),
        ("product formula", product_formula),
        ("metric anomaly", metric_anomaly),
        ("subdivision", subdivision),
        ("Witten deformation", witten),
        ("circle torsion, analytic against Morse-Smale", cheeger_muller),
        ("finite cyclic approximation", cyclic_convergence),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let known = KNOWN_UNATTAINABLE.iter().find(|k| k.0 == i + 1);
        if v.pass {
            passed += 1;
        } else if known.is_none() {
            unexpected += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if let (false, Some((_, why))) = (v.pass, known) {
            println!("             unattainable: {why}");
        }
    }
    println!("{passed} of {} criteria pass", criteria.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
