//! The Witten deformation `d_t = e^{−tf} d e^{tf}` on the interval.
//!
//! Functions live on `N + 1` nodes with trapezoid weights, 1-forms on the `N`
//! cell midpoints with midpoint weights, both times `h`. On the cell
//! `[x_j, x_{j+1}]` with `Δ_j = f(x_{j+1}) − f(x_j)`,
//!
//! `(d_t u)_j = (e^{tΔ_j/2} u_{j+1} − e^{−tΔ_j/2} u_j) / h`,
//!
//! which is `e^{−t f̄_j} (d e^{tf} u)_j` for `f̄_j` the mean of the end values,
//! so `e^{tf} d_t = d e^{tf}` holds on the grid. The 1-form Laplacian
//! `Δ₁ = d_t d_t*` is tridiagonal and positive definite; `Δ₀` shares its
//! nonzero spectrum and has a kernel of dimension `dim E`.

use super::tridiag::{compensated_sum, BidiagonalGram};
use super::{Base, CriticalPoint, OneDSystem};
use crate::error::{Error, Result};
use crate::tol;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WittenConfig {
    /// Eigenvalues in this closed band make the split ambiguous.
    pub guard_band: (f64, f64),
    /// Eigenvalues below this value form the small subcomplex.
    pub threshold: f64,
}

impl Default for WittenConfig {
    fn default() -> Self {
        WittenConfig { guard_band: tol::GUARD_BAND, threshold: 1.0 }
    }
}

/// `log` of the factor `(π/t)^{(n−2k)/4} e^{−t f(p)}` by which the scaling
/// map acts at a critical point of index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFactor {
    pub x: f64,
    pub index: usize,
    pub log_factor: f64,
}

/// Coefficients of `d_t` on the grid: `(d_t u)_j = plus[j] u_{j+1} − minus[j] u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedDifferential {
    pub nodes: Vec<f64>,
    pub f_nodes: Vec<f64>,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl DeformedDifferential {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.minus.len()).map(|j| self.plus[j] * u[j + 1] - self.minus[j] * u[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WittenRun {
    pub t: f64,
    pub cells: usize,
    pub fiber_dim: usize,
    /// Eigenvalues of `Δ₁`, ascending, each of multiplicity `dim E`.
    pub spectrum: Vec<f64>,
    /// `−½ log det Δ₁` from the entries of `d_t`, independent of the eigensolve.
    pub log_t_an: f64,
    /// `log Vol(t)`; `None` without index-0 critical points.
    pub log_vol: Option<f64>,
    pub scaling: Vec<ScalingFactor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WittenSplit {
    pub log_t_sm: f64,
    pub log_t_la: f64,
    /// Dimensions of the small subcomplex in degrees 0 and 1.
    pub small_ranks: [usize; 2],
    /// `|log T^Sm + log T^La − log T^An|`.
    pub residual: f64,
}

impl WittenSplit {
    pub fn small_rank(&self) -> usize {
        self.small_ranks[0] + self.small_ranks[1]
    }
}

/// Per-fiber scalar metric at `x`, after passing to an `h`-orthonormal frame
/// when `h` is constant.
fn scalar_metric(sys: &OneDSystem) -> Result<impl Fn(f64) -> f64 + '_> {
    let constant = sys.has_constant_metric();
    if sys.fiber_dim != 1 && !constant {
        return Err(Error::Unsupported("Witten runs with a varying metric need a line bundle".into()));
    }
    Ok(move |x: f64| if constant { 1.0 } else { sys.metric_at(x)[(0, 0)].re })
}

fn grid(sys: &OneDSystem, n: usize) -> Result<(f64, f64)> {
    sys.validated()?;
    let Base::Interval { a, b } = sys.base else {
        return Err(Error::InvalidInput("Witten runs are defined on the interval".into()));
    };
    if n < 2 {
        return Err(Error::InvalidInput(format!("grid of {n} cells, need at least 2")));
    }
    Ok((a, (b - a) / n as f64))
}

/// `d_t` on `n` cells in the unweighted nodal coordinates.
pub fn deformed_differential(sys: &OneDSystem, t: f64, n: usize) -> Result<DeformedDifferential> {
    let (a, h) = grid(sys, n)?;
    let nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
    let f_nodes: Vec<f64> = nodes.iter().map(|&x| sys.morse_value(x)).collect();
    let (minus, plus) = (0..n)
        .map(|j| {
            let half = 0.5 * t * (f_nodes[j + 1] - f_nodes[j]);
            ((-half).exp() / h, half.exp() / h)
        })
        .unzip();
    Ok(DeformedDifferential { nodes, f_nodes, minus, plus })
}

/// Discretizes the Witten-deformed complex at parameter `t` on `n` cells and
/// solves for the spectrum of `Δ₁`.
pub fn witten_discretize(sys: &OneDSystem, t: f64, n: usize) -> Result<WittenRun> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!("deformation parameter t = {t} must be finite and nonnegative")));
    }
    let (_, h) = grid(sys, n)?;
    let hx = scalar_metric(sys)?;
    let dt = deformed_differential(sys, t, n)?;
    let w0: Vec<f64> = dt.nodes.iter().enumerate().map(|(i, &x)| if i == 0 || i == n { 0.5 * h * hx(x) } else { h * hx(x) }).collect();
    let w1: Vec<f64> = (0..n).map(|j| h * hx(0.5 * (dt.nodes[j] + dt.nodes[j + 1]))).collect();
    let alpha: Vec<f64> = (0..n).map(|j| dt.minus[j] * (w1[j] / w0[j]).sqrt()).collect();
    let beta: Vec<f64> = (0..n).map(|j| dt.plus[j] * (w1[j] / w0[j + 1]).sqrt()).collect();
    let gram = BidiagonalGram::new(&alpha, &beta);
    let d = sys.fiber_dim;
    let log_t_an = -0.5 * d as f64 * gram.log_det();
    let spectrum = gram.eigenvalues();

    let crit = sys.critical_points();
    let minima: Vec<&CriticalPoint> = crit.iter().filter(|p| p.index == 0).collect();
    let log_vol = (!minima.is_empty()).then(|| {
        let fmin = dt.f_nodes.iter().copied().fold(f64::INFINITY, f64::min);
        let s: f64 = w0.iter().zip(&dt.f_nodes).map(|(w, f)| w * (-2.0 * t * (f - fmin)).exp()).sum();
        let at_crit: f64 = minima.iter().map(|p| hx(p.x)).sum();
        0.5 * d as f64 * (at_crit.ln() - s.ln() + 2.0 * t * fmin)
    });
    let scaling = if t > 0.0 {
        crit.iter()
            .map(|p| ScalingFactor { x: p.x, index: p.index, log_factor: (1.0 - 2.0 * p.index as f64) / 4.0 * (PI / t).ln() - t * p.value })
            .collect()
    } else {
        Vec::new()
    };
    Ok(WittenRun { t, cells: n, fiber_dim: d, spectrum, log_t_an, log_vol, scaling })
}

/// Splits the run at the threshold into the small and large subcomplexes.
pub fn witten_split(run: &WittenRun, cfg: &WittenConfig) -> Result<WittenSplit> {
    let (lo, hi) = cfg.guard_band;
    if let Some(&mu) = run.spectrum.iter().find(|&&mu| mu >= lo && mu <= hi) {
        return Err(Error::GuardBand { eigenvalue: mu, lo, hi });
    }
    let d = run.fiber_dim as f64;
    let small = run.spectrum.partition_point(|&mu| mu < cfg.threshold);
    let log_t_sm = -0.5 * d * compensated_sum(run.spectrum[..small].iter().map(|m| m.ln()));
    let log_t_la = -0.5 * d * compensated_sum(run.spectrum[small..].iter().map(|m| m.ln()));
    Ok(WittenSplit {
        log_t_sm,
        log_t_la,
        small_ranks: [run.fiber_dim * (1 + small), run.fiber_dim * small],
        residual: (log_t_sm + log_t_la - run.log_t_an).abs(),
    })
}

/// One line of a t-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WittenRow {
    pub t: f64,
    pub log_t_sm: f64,
    pub log_t_la: f64,
    pub log_t_an: f64,
    pub residual: f64,
    pub small_rank: usize,
    pub log_vol: Option<f64>,
}

pub fn witten_sweep(sys: &OneDSystem, ts: &[f64], n: usize, cfg: &WittenConfig) -> Result<Vec<WittenRow>> {
    ts.iter()
        .map(|&t| {
            let run = witten_discretize(sys, t, n)?;
            let s = witten_split(&run, cfg)?;
            Ok(WittenRow {
                t,
                log_t_sm: s.log_t_sm,
                log_t_la: s.log_t_la,
                log_t_an: run.log_t_an,
                residual: s.residual,
                small_rank: s.small_rank(),
                log_vol: run.log_vol,
            })
        })
        .collect()
}

/// Least-squares fit of `a₀ + b₀ log t + a₁ t + b₁ t log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeTermFit {
    /// `a₀`.
    pub free_term: f64,
    /// `[a₀, b₀, a₁, b₁]`.
    pub coefficients: [f64; 4],
    /// Root-mean-square residual.
    pub residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

pub fn free_term_extract(samples: &[(f64, f64)]) -> Result<FreeTermFit> {
    if samples.len() < 6 {
        return Err(Error::InvalidInput(format!("{} samples, need at least 6", samples.len())));
    }
    if samples.iter().any(|&(t, y)| !(t > 0.0 && t.is_finite() && y.is_finite())) {
        return Err(Error::InvalidInput("samples need finite values at positive t".into()));
    }
    let tmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let tmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if tmax < 10.0 * tmin * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!("samples span [{tmin}, {tmax}], less than a decade")));
    }
    let m = samples.len();
    let mut x = DMatrix::from_fn(m, 4, |i, j| {
        let t = samples[i].0;
        match j {
            0 => 1.0,
            1 => t.ln(),
            2 => t,
            _ => t * t.ln(),
        }
    });
    let scale: Vec<f64> = (0..4).map(|j| x.column(j).amax().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scale.iter().enumerate() {
        x.column_mut(j).scale_mut(1.0 / s);
    }
    let y = DVector::from_iterator(m, samples.iter().map(|s| s.1));
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= tol::FIT_CONDITION_MAX) {
        return Err(Error::IllConditioned { condition });
    }
    let beta = svd.solve(&y, 0.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let rss = (&x * &beta - &y).norm_squared();
    let coefficients = [beta[0] / scale[0], beta[1] / scale[1], beta[2] / scale[2], beta[3] / scale[3]];
    Ok(FreeTermFit { free_term: coefficients[0], coefficients, residual: (rss / m as f64).sqrt(), condition })
}

/// Constant term of the large-`t` expansion of `log T^Sm(t) − log Vol(t)` on
/// an `n`-manifold: `log T^MS + dim E · Σ_p (n − 2 ind p)/4 · log π`. The
/// `log t` and `t f(p)` terms have no constant part.
pub fn small_torsion_prediction(log_t_ms: f64, critical: &[CriticalPoint], fiber_dim: usize, n: usize) -> f64 {
    let s: f64 = critical.iter().map(|p| (n as f64 - 2.0 * p.index as f64) / 4.0 * PI.ln()).sum();
    log_t_ms + fiber_dim as f64 * s
}
