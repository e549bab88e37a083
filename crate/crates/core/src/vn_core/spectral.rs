use std::fmt;

use super::group::FiniteGroup;
use super::operator::{EquivariantOperator, Realization};
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigen, singular_values, CMat, C64};
use crate::quad::{circle_mean, uniform_nodes, QuadConfig};
use crate::tol;

/// Knobs for the spectral computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Relative kernel threshold τ.
    pub tau: f64,
    pub quad: QuadConfig,
    /// Uniform θ-nodes used to sample spectral density functions over ℤ.
    pub density_nodes: usize,
    /// Nodes probing the generic rank of a Laurent operator.
    pub rank_probes: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { tau: tol::KERNEL_TAU, quad: QuadConfig::default(), density_nodes: tol::DENSITY_NODES, rank_probes: 16 }
    }
}

/// Irrational offset keeping probe nodes away from rational angles where
/// Laurent operators typically drop rank.
pub(crate) const PROBE_OFFSET: f64 = 0.414_213_562_373_095_1;

/// Fiber matrices of an operator as a function of the Bloch angle.
pub(crate) struct Fibers<'a> {
    op: &'a EquivariantOperator,
    regular: Option<Realization>,
}

impl<'a> Fibers<'a> {
    pub(crate) fn new(op: &'a EquivariantOperator) -> Self {
        let regular = match op.group().finite_part() {
            FiniteGroup::Cyclic(_) => None,
            FiniteGroup::Table { .. } => Some(op.realize()),
        };
        Fibers { op, regular }
    }

    pub(crate) fn at(&self, theta: f64) -> Vec<CMat> {
        match &self.regular {
            Some(r) => vec![r.at(theta)],
            None => self.op.fibers(theta),
        }
    }

    pub(crate) fn weight(&self) -> f64 {
        self.op.fiber_weight()
    }
}

/// `tr_N(op)`, possibly complex for non-self-adjoint input.
pub fn vn_trace_complex(op: &EquivariantOperator) -> Result<C64> {
    if !op.is_square() {
        return Err(Error::NotSquare { rows: op.target_rank(), cols: op.source_rank() });
    }
    // Only the identity coefficient contributes; the regular representation
    // trace of g ≠ e vanishes and e^{ikθ} averages to zero for k ≠ 0.
    let one = op.group().one();
    let mut t = c64(0.0, 0.0);
    for i in 0..op.source_rank() {
        if let Some(b) = op.entry(i, i).get(&one) {
            t += b.trace();
        }
    }
    Ok(t)
}

/// `tr_N(op)`. With `positivity_check` the realized fibers must be positive semidefinite.
pub fn vn_trace(op: &EquivariantOperator, positivity_check: bool) -> Result<f64> {
    let t = vn_trace_complex(op)?;
    if positivity_check {
        check_positive(op)?;
    }
    Ok(t.re)
}

/// Same value as [`vn_trace`] computed from the concrete realization:
/// the regular-representation trace over a finite group, or uniform
/// quadrature of the fiber trace (exact for trigonometric polynomials) over ℤ.
pub fn vn_trace_realized(op: &EquivariantOperator) -> Result<C64> {
    if !op.is_square() {
        return Err(Error::NotSquare { rows: op.target_rank(), cols: op.source_rank() });
    }
    let fibers = Fibers::new(op);
    let (lo, hi) = op.power_span();
    let n = if op.group().has_integers() { (2 * (hi - lo) + 2) as usize } else { 1 };
    let mut t = c64(0.0, 0.0);
    for theta in uniform_nodes(n, 0.0) {
        for m in fibers.at(theta) {
            t += m.trace();
        }
    }
    Ok(t * fibers.weight() / n as f64)
}

fn check_positive(op: &EquivariantOperator) -> Result<()> {
    let fibers = Fibers::new(op);
    let (lo, hi) = op.power_span();
    let n = if op.group().has_integers() { (2 * (hi - lo) + 2).max(8) as usize } else { 1 };
    for theta in uniform_nodes(n, PROBE_OFFSET) {
        for m in fibers.at(theta) {
            let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
            if (&m - m.adjoint()).iter().any(|z| z.norm() > tol::HERMITIAN_TOL * scale) {
                return Err(Error::NotPositive { min_eigenvalue: f64::NAN });
            }
            let (vals, _) = hermitian_eigen(&m);
            if let Some(&lo) = vals.first() {
                if lo < -tol::HERMITIAN_TOL * scale {
                    return Err(Error::NotPositive { min_eigenvalue: lo });
                }
            }
        }
    }
    Ok(())
}

/// Fuglede–Kadison determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkDet {
    /// `∫_{0+} log λ dF`; `-∞` when not of determinant class.
    pub log_det: f64,
    pub determinant_class: bool,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl FkDet {
    pub fn det(&self) -> f64 {
        self.log_det.exp()
    }
}

/// `det_N(op)` with the default configuration.
pub fn fk_det(op: &EquivariantOperator) -> Result<FkDet> {
    fk_det_with(op, &SpectralConfig::default())
}

pub fn fk_det_with(op: &EquivariantOperator, cfg: &SpectralConfig) -> Result<FkDet> {
    let fibers = Fibers::new(op);
    let w = fibers.weight();
    if !op.group().has_integers() {
        let svs: Vec<Vec<f64>> = fibers.at(0.0).iter().map(singular_values).collect();
        let smax = svs.iter().flatten().fold(0.0f64, |a, &s| a.max(s));
        let cut = cfg.tau * smax;
        let log_det = w * svs.iter().flatten().filter(|&&s| s > cut).map(|s| s.ln()).sum::<f64>();
        return Ok(FkDet { log_det, determinant_class: true, error_estimate: 0.0, evaluations: 1 });
    }

    let ranks = generic_ranks(&fibers, cfg);
    if ranks.iter().all(|&r| r == 0) {
        return Ok(FkDet { log_det: 0.0, determinant_class: true, error_estimate: 0.0, evaluations: 0 });
    }
    let mut qcfg = cfg.quad;
    qcfg.divergence_floor = tol::DIVERGENCE_CUTOFF * op.source_dim().max(1.0);
    // Singular values below rounding level of the fiber entries carry no information.
    let floor = f64::EPSILON * probe_norm(&fibers, cfg);
    let res = circle_mean(
        |theta| {
            let mut s = 0.0;
            for (m, &r) in fibers.at(theta).iter().zip(&ranks) {
                if r == 0 {
                    continue;
                }
                let sv = singular_values(m);
                s += sv[..r].iter().map(|x| x.max(floor).ln()).sum::<f64>();
            }
            w * s
        },
        &qcfg,
    );
    if res.diverged {
        return Ok(FkDet {
            log_det: f64::NEG_INFINITY,
            determinant_class: false,
            error_estimate: res.error_estimate,
            evaluations: res.evaluations,
        });
    }
    if !res.converged {
        return Err(Error::NonConvergence { what: "Fuglede-Kadison log-integral".into(), achieved: res.error_estimate });
    }
    Ok(FkDet { log_det: res.value, determinant_class: true, error_estimate: res.error_estimate, evaluations: res.evaluations })
}

fn probe_norm(fibers: &Fibers<'_>, cfg: &SpectralConfig) -> f64 {
    uniform_nodes(cfg.rank_probes.max(1), PROBE_OFFSET)
        .flat_map(|t| fibers.at(t).iter().map(|m| singular_values(m).first().copied().unwrap_or(0.0)).collect::<Vec<_>>())
        .fold(f64::MIN_POSITIVE, f64::max)
}

/// Generic rank of every fiber of a Laurent operator.
pub(crate) fn generic_ranks(fibers: &Fibers<'_>, cfg: &SpectralConfig) -> Vec<usize> {
    let samples: Vec<Vec<Vec<f64>>> =
        uniform_nodes(cfg.rank_probes.max(1), PROBE_OFFSET).map(|t| fibers.at(t).iter().map(singular_values).collect()).collect();
    let smax = samples.iter().flatten().flatten().fold(0.0f64, |a, &s| a.max(s));
    let cut = cfg.tau * smax;
    let nf = samples[0].len();
    (0..nf).map(|f| samples.iter().map(|node| node[f].iter().filter(|&&s| s > cut).count()).max().unwrap_or(0)).collect()
}

/// Novikov–Shubin invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    /// Fitted growth exponent with the RMS residual of the log-log fit.
    Exponent {
        value: f64,
        residual: f64,
    },
    /// `∞⁺`: `F(λ) = F(0)` for `λ < gap`.
    Gap {
        gap: f64,
    },
    Unresolved {
        reason: String,
    },
}

impl Alpha {
    pub fn is_gap(&self) -> bool {
        matches!(self, Alpha::Gap { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Alpha::Exponent { value, .. } => Some(*value),
            Alpha::Gap { .. } => Some(f64::INFINITY),
            Alpha::Unresolved { .. } => None,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Exponent { value, .. } => write!(f, "{value}"),
            Alpha::Gap { .. } => write!(f, "inf+"),
            Alpha::Unresolved { .. } => write!(f, "unresolved"),
        }
    }
}

/// Sampled spectral density function of `|op|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    /// `(λ, F(λ))`, λ ascending.
    pub samples: Vec<(f64, f64)>,
    pub kernel_dim: f64,
    pub alpha: Alpha,
    pub log_integral: f64,
    pub determinant_class: bool,
    /// von Neumann dimension of the source module, `F(∞)`.
    pub vn_dim: f64,
    /// Smallest positive singular value encountered, 0 if the spectrum reaches 0.
    pub spectral_floor: f64,
    /// Upper bound of the spectrum.
    pub norm: f64,
}

impl SpectralDensity {
    /// `F(λ)` read off the samples as a right-continuous step function.
    pub fn at(&self, lambda: f64) -> f64 {
        self.samples.iter().take_while(|(l, _)| *l <= lambda).last().map(|s| s.1).unwrap_or(self.kernel_dim)
    }
}

/// `0` followed by ten points per decade from `norm·10⁻³` to `norm`.
pub fn default_grid(norm: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    if norm > 0.0 {
        g.extend((0..=30).map(|i| norm * 10f64.powf(-3.0 + i as f64 / 10.0)));
    }
    g
}

/// Spectral density on `grid` (the default grid when `None`).
pub fn spectral_density(op: &EquivariantOperator, grid: Option<&[f64]>) -> Result<SpectralDensity> {
    spectral_density_with(op, grid, &SpectralConfig::default())
}

pub fn spectral_density_with(op: &EquivariantOperator, grid: Option<&[f64]>, cfg: &SpectralConfig) -> Result<SpectralDensity> {
    if let Some(g) = grid {
        if g.iter().any(|l| !(l.is_finite() && *l >= 0.0)) || g.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("λ-grid must be sorted and nonnegative".into()));
        }
    }
    let fibers = Fibers::new(op);
    let w = fibers.weight();
    let vn_dim = op.source_dim();
    let sd = if op.group().has_integers() {
        let mut sd = laurent_density(op, &fibers, grid, cfg)?;
        sd.alpha = novikov_shubin(&sd);
        sd
    } else {
        let cols = op.source_rank() * op.fiber_dim();
        let mut all = Vec::new();
        for m in fibers.at(0.0) {
            let mut s = singular_values(&m);
            s.resize(cols, 0.0);
            all.extend(s);
        }
        let smax = all.iter().fold(0.0f64, |a, &s| a.max(s));
        let cut = cfg.tau * smax;
        for s in &mut all {
            if *s <= cut {
                *s = 0.0;
            }
        }
        all.sort_by(f64::total_cmp);
        let zeros = all.iter().filter(|&&s| s == 0.0).count();
        let floor = all.iter().copied().find(|&s| s > 0.0).unwrap_or(f64::INFINITY);
        let grid = grid.map(<[f64]>::to_vec).unwrap_or_else(|| default_grid(smax));
        let samples = grid.iter().map(|&l| (l, w * all.iter().filter(|&&s| s <= l).count() as f64)).collect();
        SpectralDensity {
            samples,
            kernel_dim: w * zeros as f64,
            alpha: Alpha::Gap { gap: floor },
            log_integral: w * all.iter().filter(|&&s| s > 0.0).map(|s| s.ln()).sum::<f64>(),
            determinant_class: true,
            vn_dim,
            spectral_floor: floor,
            norm: smax,
        }
    };
    Ok(sd)
}

fn laurent_density(op: &EquivariantOperator, fibers: &Fibers<'_>, grid: Option<&[f64]>, cfg: &SpectralConfig) -> Result<SpectralDensity> {
    let cols = op.source_rank() * op.fiber_dim();
    let n = cfg.density_nodes.max(2);
    // sv[f][i][j]: i-th smallest singular value of fiber f at node j.
    let mut sv: Vec<Vec<Vec<f64>>> = Vec::new();
    for (j, theta) in uniform_nodes(n, 0.0).enumerate() {
        for (f, m) in fibers.at(theta).iter().enumerate() {
            let mut s = singular_values(m);
            s.resize(cols, 0.0);
            s.reverse();
            if sv.len() <= f {
                sv.push(vec![vec![0.0; n]; cols]);
            }
            for (i, v) in s.into_iter().enumerate() {
                sv[f][i][j] = v;
            }
        }
    }
    let smax = sv.iter().flatten().flatten().fold(0.0f64, |a, &s| a.max(s));
    let cut = cfg.tau * smax;
    let kernel: Vec<usize> =
        sv.iter().map(|fiber| (0..n).map(|j| fiber.iter().filter(|row| row[j] <= cut).count()).min().unwrap_or(0)).collect();
    let w = fibers.weight();
    let kernel_dim = w * kernel.iter().sum::<usize>() as f64;
    let floor =
        sv.iter().zip(&kernel).filter_map(|(fiber, &k)| fiber.get(k)).flat_map(|row| row.iter().copied()).fold(f64::INFINITY, f64::min);

    let grid = grid.map(<[f64]>::to_vec).unwrap_or_else(|| default_grid(smax));
    let samples = grid
        .iter()
        .map(|&l| {
            let mut total = kernel_dim;
            for (fiber, &k) in sv.iter().zip(&kernel) {
                for row in &fiber[k..] {
                    total += w * sublevel_fraction(row, l);
                }
            }
            (l, total)
        })
        .collect();

    let det = fk_det_with(op, cfg)?;
    Ok(SpectralDensity {
        samples,
        kernel_dim,
        alpha: Alpha::Unresolved { reason: "not yet fitted".into() },
        log_integral: det.log_det,
        determinant_class: det.determinant_class,
        vn_dim: op.source_dim(),
        spectral_floor: if floor <= cut { 0.0 } else { floor },
        norm: smax,
    })
}

/// Fraction of the circle where the periodic piecewise-linear interpolant of
/// `values` is `≤ lambda`.
fn sublevel_fraction(values: &[f64], lambda: f64) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for j in 0..n {
        let a = values[j];
        let b = values[(j + 1) % n];
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        acc += if hi <= lambda {
            1.0
        } else if lo > lambda {
            0.0
        } else {
            (lambda - lo) / (hi - lo)
        };
    }
    acc / n as f64
}

/// Growth exponent of `F(λ) − F(0)` as `λ → 0⁺`, fitted over the lowest
/// sampled decade.
pub fn novikov_shubin(sd: &SpectralDensity) -> Alpha {
    let pos: Vec<(f64, f64)> = sd.samples.iter().copied().filter(|s| s.0 > 0.0).collect();
    let Some(&(l0, _)) = pos.first() else {
        return Alpha::Unresolved { reason: "no positive λ samples".into() };
    };
    let window: Vec<(f64, f64)> = pos.iter().copied().filter(|s| s.0 <= 10.0 * l0 * (1.0 + 1e-12)).collect();
    let flat_tol = 1e-12 * sd.vn_dim.max(1.0);
    let excess: Vec<f64> = window.iter().map(|s| s.1 - sd.kernel_dim).collect();
    let flat = excess.iter().filter(|&&e| e <= flat_tol).count();
    if sd.spectral_floor > 0.0 && (flat == window.len() || sd.spectral_floor.is_infinite()) {
        return Alpha::Gap { gap: sd.spectral_floor };
    }
    if window.len() < tol::NS_MIN_POINTS {
        return Alpha::Unresolved { reason: format!("{} samples in the lowest decade, need {}", window.len(), tol::NS_MIN_POINTS) };
    }
    if flat == window.len() {
        return Alpha::Unresolved { reason: "F is flat on the lowest decade but no spectral gap was detected".into() };
    }
    if flat > 0 {
        return Alpha::Unresolved { reason: "F leaves F(0) inside the lowest decade; refine the λ-grid".into() };
    }
    let xs: Vec<f64> = window.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = excess.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    Alpha::Exponent { value: slope, residual: (rss / n).sqrt() }
}
