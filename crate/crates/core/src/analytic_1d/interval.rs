use super::{circle_torsion, theta_1d, Base, OneDSystem};
use crate::error::{Error, Result};
use crate::linalg::{check_positive_definite, log_det_hpd, CMat};
use crate::morse_smale::{CriticalOrbit, MorseSystem, Representation};
use crate::vn_core::GroupSpec;
use serde::Serialize;
use std::f64::consts::PI;

const ZETA_TERMS: usize = 10_000;

/// `B_{2k} / (2k (2k − 1))` for `k = 1, 2, 3`.
const STIRLING: [f64; 3] = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0];

/// The first `count` eigenvalues `n²π²/l²` of the Laplacian in degree `k`:
/// `n ≥ 0` for functions, `n ≥ 1` for 1-forms. Each has multiplicity `dim E`.
pub fn interval_spectrum(sys: &OneDSystem, degree: usize, count: usize) -> Result<Vec<f64>> {
    sys.validated()?;
    let Base::Interval { a, b } = sys.base else {
        return Err(Error::InvalidInput("interval_spectrum needs an interval base".into()));
    };
    let start = match degree {
        0 => 0,
        1 => 1,
        _ => return Err(Error::InvalidInput(format!("no forms of degree {degree} on the interval"))),
    };
    let c = PI / (b - a);
    Ok((start..start + count).map(|n| (n as f64 * c).powi(2)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaTorsion {
    /// `−(dim E / 2)(log 2 + log l)`.
    pub log_t_an: f64,
    /// The same quantity from the eigenvalue sum continued to `s = 0`.
    pub numeric: f64,
    pub residual: f64,
}

/// `ζ′(0)` for `{(cn)² : n ≥ 1}` from the first `n_terms − 1` eigenvalues and
/// an Euler–Maclaurin expansion of the regularised tail.
fn zeta_prime_at_zero(c: f64, n_terms: usize) -> f64 {
    let n = n_terms as f64;
    let head: f64 = (1..n_terms).map(|k| ((k as f64) * c).powi(2).ln()).sum();
    let stirling: f64 = STIRLING.iter().enumerate().map(|(k, b)| b * n.powi(-(2 * k as i32 + 1))).sum();
    // Regularised Σ_{n ≥ N} 1 = ½ − N and Σ_{n ≥ N} log n = −(N log N − N − ½ log N + …).
    -head - 2.0 * c.ln() * (0.5 - n) + 2.0 * (n * n.ln() - n - 0.5 * n.ln() + stirling)
}

/// `log T^An = ½ ζ′_{Δ₁}(0)` on the interval with a constant metric.
pub fn zeta_torsion_interval(sys: &OneDSystem) -> Result<ZetaTorsion> {
    sys.validated()?;
    let Base::Interval { a, b } = sys.base else {
        return Err(Error::InvalidInput("zeta_torsion_interval needs an interval base".into()));
    };
    if !sys.has_constant_metric() {
        return Err(Error::Unsupported("analytic torsion of the interval with a varying metric".into()));
    }
    let l = b - a;
    let d = sys.fiber_dim as f64;
    let c = PI / l;
    let fine = zeta_prime_at_zero(c, ZETA_TERMS);
    let coarse = zeta_prime_at_zero(c, ZETA_TERMS / 2);
    if (fine - coarse).abs() > 1e-8 {
        return Err(Error::NonConvergence { what: "zeta continuation on the interval".into(), achieved: (fine - coarse).abs() });
    }
    let closed = -0.5 * d * (2.0f64.ln() + l.ln());
    let numeric = 0.5 * d * fine;
    Ok(ZetaTorsion { log_t_an: closed, numeric, residual: (numeric - closed).abs() })
}

/// The Morse system of the standard Morse function: one critical point of
/// index 0 at the midpoint, carrying `h` there.
pub fn interval_morse_system(sys: &OneDSystem) -> Result<MorseSystem> {
    sys.validated()?;
    if !sys.is_interval() {
        return Err(Error::InvalidInput("interval_morse_system needs an interval base".into()));
    }
    let group = GroupSpec::trivial();
    let mut ms = MorseSystem::new(group.clone(), Representation::trivial(&group, sys.fiber_dim));
    for p in sys.critical_points() {
        ms.add_orbit(CriticalOrbit::new("m", p.index, sys.metric_at(p.x)));
    }
    Ok(ms)
}

/// `log T^Met = ½ log det(Θ*Θ)` for a Morse system on the interval over the
/// trivial group. Harmonic functions are the constant sections `c`, with
/// squared norm `c* G c`, `G = ∫ h`. `Θ` evaluates `c` at the index-0 critical
/// points, where the norm is `c* h(p) c`, so `Θ*Θ = G⁻¹ Σ_p h(p)`.
pub fn metric_torsion_of(sys: &OneDSystem, ms: &MorseSystem) -> Result<f64> {
    sys.validated()?;
    if !sys.is_interval() || !ms.group.is_trivial() {
        return Err(Error::InvalidInput("metric torsion is computed for interval systems over the trivial group".into()));
    }
    if ms.fiber_dim() != sys.fiber_dim {
        return Err(Error::InvalidInput(format!("Morse system has fiber {}, bundle has {}", ms.fiber_dim(), sys.fiber_dim)));
    }
    let d = sys.fiber_dim;
    let mut sum = CMat::zeros(d, d);
    for o in ms.orbits.iter().filter(|o| o.index == 0) {
        sum += &o.metric;
    }
    check_positive_definite(&sum, "sum of index-0 metrics")?;
    let g = sys.metric_integral();
    Ok(0.5 * (log_det_hpd(&sum) - log_det_hpd(&g)))
}

/// `log T^Met` of the interval with its standard Morse function.
pub fn metric_torsion_interval(sys: &OneDSystem) -> Result<f64> {
    metric_torsion_of(sys, &interval_morse_system(sys)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionReport {
    pub log_t_an: f64,
    pub log_t_met: f64,
    pub log_t_ms: f64,
    /// `log T^An − log T^Met`.
    pub log_t_rs: f64,
    /// `log T^RS − log T^MS`.
    pub relative: f64,
    pub chi_manifold: i64,
    pub chi_boundary: i64,
    /// `∫ θ(h)`; `None` when `h` is not unimodular.
    pub theta_integral: Option<f64>,
    /// Named residuals of the numerical layers behind the report.
    pub residuals: Vec<(String, f64)>,
}

/// All torsion quantities of an interval or circle system.
pub fn torsion_report(sys: &OneDSystem) -> Result<TorsionReport> {
    sys.validated()?;
    let (an, met, ms, residuals, chi, chi_b) = match sys.base {
        Base::Interval { .. } => {
            let z = zeta_torsion_interval(sys)?;
            let met = metric_torsion_interval(sys)?;
            let ms = interval_morse_system(sys)?.ms_torsion()?;
            (z.log_t_an, met, ms, vec![("zeta_continuation".to_string(), z.residual)], 1, 2)
        }
        Base::Circle { .. } => {
            let c = circle_torsion(sys)?;
            (c.log_t_an, 0.0, c.log_t_ms, vec![("quadrature".to_string(), c.error_estimate)], 0, 0)
        }
    };
    let theta_integral = match sys.base {
        Base::Interval { .. } => {
            let theta = theta_1d(sys)?;
            theta.unimodular.then(|| theta.integral())
        }
        // The circle carries the metric in which flat sections have constant
        // length; its θ vanishes exactly when |det ρ| = 1.
        Base::Circle { .. } => {
            let det = sys.holonomy.as_ref().map_or(1.0, |r| r.determinant().norm());
            ((det.ln()).abs() < crate::tol::UNIMODULAR_TOL).then_some(0.0)
        }
    };
    Ok(TorsionReport {
        log_t_an: an,
        log_t_met: met,
        log_t_ms: ms,
        log_t_rs: an - met,
        relative: an - met - ms,
        chi_manifold: chi,
        chi_boundary: chi_b,
        theta_integral,
        residuals,
    })
}
