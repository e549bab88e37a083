use super::{Base, OneDSystem};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_power, max_abs, CMat};
use crate::morse_smale::{CriticalOrbit, MorseSystem, Representation};
use crate::quad::{circle_mean, QuadConfig};
use crate::vn_core::{Elem, GroupSpec};
use serde::Serialize;
use std::f64::consts::{PI, TAU};

const PRODUCT_TERMS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleTorsion {
    pub log_t_an: f64,
    pub log_t_ms: f64,
    /// Difference between the two quadrature passes of the analytic side.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// `log det_ζ` of the family `4π²((n + a)² + b²)`, `n ∈ ℤ`, from the product
/// over `|n| ≤ terms` and an expansion of the remaining tail. Equals
/// `log(2 cosh 2πb − 2 cos 2πa)`.
pub fn zeta_log_det_twisted(a: f64, b: f64, terms: usize) -> f64 {
    let a = a - a.round();
    let a2 = a * a;
    let b2 = b * b;
    let big_a = 2.0 * (b2 - a2);
    let big_b = (a2 + b2) * (a2 + b2);
    let mut acc = 0.0;
    for n in 1..=terms {
        let n2 = (n * n) as f64;
        acc += ((big_a * n2 + big_b) / (n2 * n2)).ln_1p();
    }
    let nn = terms as f64;
    let inv_sq = 1.0 / nn - 0.5 / (nn * nn) + 1.0 / (6.0 * nn.powi(3));
    let inv_quad = 1.0 / (3.0 * nn.powi(3));
    let tail = big_a * inv_sq + (big_b - 0.5 * big_a * big_a) * inv_quad;
    // ∏_{n ≥ 1} n⁴ regularises to 4π² and the scale 4π² contributes with ζ(0) = 0.
    (a2 + b2).ln() + acc + tail + (4.0 * PI * PI).ln()
}

/// Critical points `p` (index 0, metric `I`) and `q` (index 1, metric
/// `(ρρ*)^{−1/2}`), with `δp = q − ρ z q`. These are the values at the two
/// points of the metric `(ρρ*)^{−x/l}` under which the flat sections of a
/// normal holonomy have constant length.
pub fn circle_morse_system(sys: &OneDSystem) -> Result<MorseSystem> {
    let rho = circle_holonomy(sys)?;
    let d = rho.nrows();
    let group = GroupSpec::integers();
    let mut ms = MorseSystem::new(group, Representation::holonomy(rho.clone())?);
    let p = ms.add_orbit(CriticalOrbit::new("p", 0, CMat::identity(d, d)));
    let q = ms.add_orbit(CriticalOrbit::new("q", 1, hermitian_power(&(&rho * rho.adjoint()), -0.5)));
    ms.add_incidence(p, q, &[(Elem::z(0), 1), (Elem::z(1), -1)]);
    Ok(ms)
}

fn circle_holonomy(sys: &OneDSystem) -> Result<CMat> {
    sys.validated()?;
    if !matches!(sys.base, Base::Circle { .. }) {
        return Err(Error::InvalidInput("circle system expected".into()));
    }
    let rho = sys.holonomy.clone().ok_or_else(|| Error::InvalidInput("circle system needs a holonomy".into()))?;
    let scale = max_abs(&rho).powi(2).max(1.0);
    if max_abs(&(&rho * rho.adjoint() - rho.adjoint() * &rho)) > 1e-10 * scale {
        return Err(Error::Unsupported("circle torsion for a non-normal holonomy".into()));
    }
    Ok(rho)
}

pub fn circle_torsion(sys: &OneDSystem) -> Result<CircleTorsion> {
    circle_torsion_with(sys, &QuadConfig::default())
}

/// Analytic and Morse–Smale torsion of the ℤ-cover of the circle.
///
/// A normal holonomy splits into eigenlines `λ = r e^{iφ}`. Over the
/// character `e^{iθ}` of ℤ the Laplacian on each line has the eigenvalues
/// `4π²((n + a)² + b²)/l²` with `a = (θ + φ)/2π`, `b = log r / 2π`, and
/// `log T^An = −½ ∫ Σ_λ log det_ζ dθ/2π`. The length drops out because the
/// family has `ζ(0) = 0`.
pub fn circle_torsion_with(sys: &OneDSystem, cfg: &QuadConfig) -> Result<CircleTorsion> {
    let rho = circle_holonomy(sys)?;
    let eig: Vec<_> = rho.clone().schur().unpack().1.diagonal().iter().copied().collect();
    let lines: Vec<(f64, f64)> = eig.iter().map(|l| (l.arg() / TAU, l.norm().ln() / TAU)).collect();
    let res = circle_mean(|theta| lines.iter().map(|&(phi, b)| zeta_log_det_twisted(theta / TAU + phi, b, PRODUCT_TERMS)).sum(), cfg);
    if !res.converged {
        return Err(Error::NonConvergence { what: "circle analytic torsion quadrature".into(), achieved: res.error_estimate });
    }
    let log_t_ms = circle_morse_system(sys)?.ms_torsion()?;
    Ok(CircleTorsion { log_t_an: -0.5 * res.value, log_t_ms, error_estimate: 0.5 * res.error_estimate, evaluations: res.evaluations })
}
