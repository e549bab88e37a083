//! Finite-type Hilbert N(Γ)-cochain complexes.
//!
//! A complex carries optional per-degree inner metrics `H_k`; every spectral
//! computation runs on the twisted differentials `H_{k+1}^{1/2} c^k H_k^{-1/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_positive_definite, hermitian_power, kernel_dim, max_abs, singular_values, CMat};
use crate::quad::{circle_mean, uniform_nodes};
use crate::tol;
use crate::vn_core::{
    fk_det_with, generic_ranks, spectral_density_with, Alpha, EquivariantOperator, Fibers, GroupSpec, SpectralConfig, PROBE_OFFSET,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertComplex {
    group: GroupSpec,
    fiber_dim: usize,
    ranks: Vec<usize>,
    differentials: Vec<EquivariantOperator>,
    metrics: Option<Vec<CMat>>,
}

/// Per-degree cohomological data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub degree: usize,
    pub rank: usize,
    pub betti: f64,
    /// Novikov–Shubin invariant of `c^k`; `None` when unresolved, `+∞` for a gap.
    pub alpha: Option<f64>,
    pub alpha_note: String,
    pub determinant_class: bool,
    /// `log det_N(c^k)` off the kernel.
    pub log_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyReport {
    pub degrees: Vec<DegreeReport>,
    pub euler_characteristic: i64,
    pub log_torsion: Option<f64>,
}

/// Both sides of the torsion comparison under a chain isomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorsionComparison {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl HilbertComplex {
    /// Complex with differentials `c^k : C^k → C^{k+1}`. Shapes are checked
    /// here; `c^{k+1} c^k = 0` is left to [`validate`](Self::validate).
    pub fn new(group: GroupSpec, fiber_dim: usize, ranks: Vec<usize>, differentials: Vec<EquivariantOperator>) -> Result<Self> {
        if ranks.is_empty() {
            if !differentials.is_empty() {
                return Err(Error::InvalidInput("differentials given for an empty complex".into()));
            }
        } else if differentials.len() + 1 != ranks.len() {
            return Err(Error::InvalidInput(format!(
                "{} ranks need {} differentials, got {}",
                ranks.len(),
                ranks.len() - 1,
                differentials.len()
            )));
        }
        for (k, c) in differentials.iter().enumerate() {
            if c.group() != &group || c.fiber_dim() != fiber_dim {
                return Err(Error::InvalidInput(format!("differential {k} has a different group or fiber")));
            }
            if c.source_rank() != ranks[k] || c.target_rank() != ranks[k + 1] {
                return Err(Error::InvalidInput(format!(
                    "differential {k} maps rank {} to {}, expected {} to {}",
                    c.source_rank(),
                    c.target_rank(),
                    ranks[k],
                    ranks[k + 1]
                )));
            }
        }
        Ok(HilbertComplex { group, fiber_dim, ranks, differentials, metrics: None })
    }

    /// `0 → C^0 → C^1 → 0` with the given differential.
    pub fn two_term(c: EquivariantOperator) -> Self {
        let ranks = vec![c.source_rank(), c.target_rank()];
        let (g, d) = (c.group().clone(), c.fiber_dim());
        Self::new(g, d, ranks, vec![c]).expect("a single differential is always consistent")
    }

    /// A complex with zero differentials.
    pub fn zero(group: GroupSpec, fiber_dim: usize, ranks: Vec<usize>) -> Self {
        let diffs = ranks.windows(2).map(|w| EquivariantOperator::zero(group.clone(), w[1], w[0], fiber_dim)).collect();
        Self::new(group, fiber_dim, ranks, diffs).expect("zero differentials are consistent")
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn differentials(&self) -> &[EquivariantOperator] {
        &self.differentials
    }

    pub fn metrics(&self) -> Option<&[CMat]> {
        self.metrics.as_deref()
    }

    /// Metric in degree `k` (identity when none is set).
    pub fn metric(&self, k: usize) -> CMat {
        let n = self.ranks[k] * self.fiber_dim;
        match &self.metrics {
            Some(m) => m[k].clone(),
            None => CMat::identity(n, n),
        }
    }

    /// `Σ (−1)^k m_k d`.
    pub fn euler_characteristic(&self) -> i64 {
        self.ranks
            .iter()
            .enumerate()
            .map(|(k, &m)| if k % 2 == 0 { (m * self.fiber_dim) as i64 } else { -((m * self.fiber_dim) as i64) })
            .sum()
    }

    /// Every violation of the complex axioms.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        for k in 0..self.differentials.len().saturating_sub(1) {
            let (a, b) = (&self.differentials[k], &self.differentials[k + 1]);
            match b.compose(a) {
                Ok(p) => {
                    let scale = (a.coefficient_norm() * b.coefficient_norm()).max(1.0);
                    let defect = p.coefficient_norm();
                    if defect > tol::COMPLEX_TOL * scale {
                        errs.push(format!("c^{} c^{} != 0 (largest coefficient {defect:e})", k + 1, k));
                    }
                }
                Err(e) => errs.push(format!("c^{} c^{}: {e}", k + 1, k)),
            }
        }
        if let Some(ms) = &self.metrics {
            if ms.len() != self.ranks.len() {
                errs.push(format!("{} metrics for {} degrees", ms.len(), self.ranks.len()));
            }
            for (k, m) in ms.iter().enumerate() {
                let n = self.ranks.get(k).copied().unwrap_or(0) * self.fiber_dim;
                if m.shape() != (n, n) {
                    errs.push(format!("metric {k} has shape {:?}, expected ({n}, {n})", m.shape()));
                } else if let Err(e) = check_positive_definite(m, &format!("metric {k}")) {
                    errs.push(e.to_string());
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub(crate) fn validated(&self) -> Result<()> {
        self.validate().map_err(Error::Validation)
    }

    /// Replaces the inner metrics (one positive definite `(m_k d)`-block per degree).
    pub fn twist_metric(&self, metrics: Vec<CMat>) -> Result<Self> {
        if metrics.len() != self.ranks.len() {
            return Err(Error::InvalidInput(format!("{} metrics for {} degrees", metrics.len(), self.ranks.len())));
        }
        for (k, m) in metrics.iter().enumerate() {
            let n = self.ranks[k] * self.fiber_dim;
            if m.shape() != (n, n) {
                return Err(Error::InvalidInput(format!("metric {k} has shape {:?}, expected ({n}, {n})", m.shape())));
            }
            check_positive_definite(m, &format!("metric {k}"))?;
        }
        let mut out = self.clone();
        out.metrics = Some(metrics);
        Ok(out)
    }

    fn metric_root(&self, k: usize, p: f64) -> Result<EquivariantOperator> {
        let r = self.ranks[k];
        let m = match &self.metrics {
            Some(ms) => hermitian_power(&ms[k], p),
            None => return Ok(EquivariantOperator::identity(self.group.clone(), r, self.fiber_dim)),
        };
        EquivariantOperator::constant(self.group.clone(), r, r, self.fiber_dim, &m)
    }

    /// `H_{k+1}^{1/2} c^k H_k^{-1/2}`: the differential as an operator between
    /// standard `L²` modules.
    pub fn twisted(&self, k: usize) -> Result<EquivariantOperator> {
        let c = &self.differentials[k];
        if self.metrics.is_none() {
            return Ok(c.clone());
        }
        self.metric_root(k + 1, 0.5)?.compose(c)?.compose(&self.metric_root(k, -0.5)?)
    }

    fn twisted_all(&self) -> Result<Vec<EquivariantOperator>> {
        (0..self.differentials.len()).map(|k| self.twisted(k)).collect()
    }

    /// `b_k = dim_N ker Δ_k`.
    pub fn l2_betti(&self, k: usize) -> Result<f64> {
        self.l2_betti_with(k, &SpectralConfig::default())
    }

    pub fn l2_betti_with(&self, k: usize, cfg: &SpectralConfig) -> Result<f64> {
        if k >= self.ranks.len() {
            return Err(Error::InvalidInput(format!("degree {k} outside a complex of length {}", self.ranks.len())));
        }
        let t = self.twisted_all()?;
        Ok(self.harmonic_fibers(&t, k, cfg).0)
    }

    /// Weighted kernel dimension of the degree-`k` Laplacian together with the
    /// generic per-fiber kernel dimensions.
    fn harmonic_fibers(&self, t: &[EquivariantOperator], k: usize, cfg: &SpectralConfig) -> (f64, Vec<usize>) {
        let out = t.get(k).map(Fibers::new);
        let inc = if k > 0 { t.get(k - 1).map(Fibers::new) } else { None };
        let cols = self.ranks[k] * self.fiber_dim;
        let w = 1.0 / self.group.order() as f64;
        let dims_at = |theta: f64| -> Vec<usize> {
            let a = out.as_ref().map(|f| f.at(theta));
            let b = inc.as_ref().map(|f| f.at(theta));
            let nf = a.as_ref().or(b.as_ref()).map(|v| v.len()).unwrap_or(self.fiber_count());
            (0..nf)
                .map(|i| {
                    let top = a.as_ref().map(|v| v[i].clone()).unwrap_or_else(|| CMat::zeros(0, cols));
                    let bot = b.as_ref().map(|v| v[i].adjoint()).unwrap_or_else(|| CMat::zeros(0, cols));
                    let mut s = CMat::zeros(top.nrows() + bot.nrows(), cols);
                    s.view_mut((0, 0), top.shape()).copy_from(&top);
                    s.view_mut((top.nrows(), 0), bot.shape()).copy_from(&bot);
                    if s.nrows() == 0 {
                        cols
                    } else {
                        kernel_dim_tau(&s, cfg.tau)
                    }
                })
                .collect()
        };
        let dims = if self.group.has_integers() {
            let mut best: Option<Vec<usize>> = None;
            for theta in uniform_nodes(64, PROBE_OFFSET) {
                let d = dims_at(theta);
                best = Some(match best {
                    None => d,
                    Some(b) => b.iter().zip(&d).map(|(x, y)| *x.min(y)).collect(),
                });
            }
            best.unwrap_or_default()
        } else {
            dims_at(0.0)
        };
        (w * dims.iter().sum::<usize>() as f64, dims)
    }

    fn fiber_count(&self) -> usize {
        match self.group.finite_part() {
            crate::vn_core::FiniteGroup::Cyclic(n) => *n,
            crate::vn_core::FiniteGroup::Table { .. } => 1,
        }
    }

    /// `log T = Σ (−1)^k log det_N(c̃^k)`.
    pub fn l2_torsion(&self) -> Result<f64> {
        self.l2_torsion_with(&SpectralConfig::default())
    }

    pub fn l2_torsion_with(&self, cfg: &SpectralConfig) -> Result<f64> {
        self.validated()?;
        let mut acc = 0.0;
        for (k, c) in self.twisted_all()?.iter().enumerate() {
            let d = fk_det_with(c, cfg)?;
            if !d.determinant_class {
                return Err(Error::NotDeterminantClass { degree: Some(k), partial: d.log_det });
            }
            acc += sign(k) * d.log_det;
        }
        Ok(acc)
    }

    /// Betti numbers, Novikov–Shubin invariants and determinants in every degree.
    pub fn cohomology(&self) -> Result<CohomologyReport> {
        self.cohomology_with(&SpectralConfig::default())
    }

    pub fn cohomology_with(&self, cfg: &SpectralConfig) -> Result<CohomologyReport> {
        self.validated()?;
        let t = self.twisted_all()?;
        let mut degrees = Vec::new();
        let mut log_torsion = Some(0.0);
        for k in 0..self.ranks.len() {
            let betti = self.harmonic_fibers(&t, k, cfg).0;
            let (alpha, note, class, log_det) = match t.get(k) {
                Some(c) => {
                    let sd = spectral_density_with(c, None, cfg)?;
                    let (a, n) = match &sd.alpha {
                        Alpha::Exponent { value, residual } => (Some(*value), format!("fit residual {residual:.3e}")),
                        Alpha::Gap { gap } => (Some(f64::INFINITY), format!("spectral gap {gap:.6e}")),
                        Alpha::Unresolved { reason } => (None, reason.clone()),
                    };
                    (a, n, sd.determinant_class, sd.log_integral)
                }
                None => (Some(f64::INFINITY), "zero map".to_string(), true, 0.0),
            };
            log_torsion = match (log_torsion, class) {
                (Some(acc), true) => Some(acc + sign(k) * log_det),
                _ => None,
            };
            degrees.push(DegreeReport {
                degree: k,
                rank: self.ranks[k],
                betti,
                alpha,
                alpha_note: note,
                determinant_class: class,
                log_det,
            });
        }
        Ok(CohomologyReport { degrees, euler_characteristic: self.euler_characteristic(), log_torsion })
    }

    /// Total complex of `C ⊗ D` with differential `c ⊗ 1 + (−1)^{deg C} 1 ⊗ d`.
    pub fn tensor_product(&self, other: &HilbertComplex) -> Result<HilbertComplex> {
        let group = self.group.product(&other.group)?;
        let (d1, d2) = (self.fiber_dim, other.fiber_dim);
        let d = d1 * d2;
        let (p, q) = (self.ranks.len(), other.ranks.len());
        if p == 0 || q == 0 {
            return Ok(HilbertComplex::zero(group, d, Vec::new()));
        }
        let top = p + q - 1;
        // summands[n] = [(i, j, offset)], i ascending.
        let mut summands: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); top];
        let mut ranks = vec![0; top];
        for n in 0..top {
            for i in 0..p {
                if n >= i && n - i < q {
                    let j = n - i;
                    summands[n].push((i, j, ranks[n]));
                    ranks[n] += self.ranks[i] * other.ranks[j];
                }
            }
        }
        let offset = |n: usize, i: usize| summands[n].iter().find(|s| s.0 == i).map(|s| s.2);
        let e1 = self.group.one();
        let e2 = other.group.one();
        let id1 = CMat::identity(d1, d1);
        let id2 = CMat::identity(d2, d2);
        let mut diffs = Vec::new();
        for n in 0..top - 1 {
            let mut op = EquivariantOperator::zero(group.clone(), ranks[n + 1], ranks[n], d);
            for &(i, j, off) in &summands[n] {
                let nj = other.ranks[j];
                if i + 1 < p {
                    let dst = offset(n + 1, i + 1).expect("summand (i+1, j) exists");
                    for (a2, a, g, b) in self.differentials[i].terms() {
                        for y in 0..nj {
                            op.add_term(dst + a2 * nj + y, off + a * nj + y, self.group.pair(&other.group, g, e2), b.kronecker(&id2))?;
                        }
                    }
                }
                if j + 1 < q {
                    let dst = offset(n + 1, i).expect("summand (i, j+1) exists");
                    let nj1 = other.ranks[j + 1];
                    let s = sign(i);
                    for (b2, b, h, blk) in other.differentials[j].terms() {
                        for x in 0..self.ranks[i] {
                            op.add_term(
                                dst + x * nj1 + b2,
                                off + x * nj + b,
                                self.group.pair(&other.group, e1, h),
                                id1.kronecker(blk) * crate::linalg::c64(s, 0.0),
                            )?;
                        }
                    }
                }
            }
            diffs.push(op);
        }
        let mut out = HilbertComplex::new(group, d, ranks.clone(), diffs)?;
        if self.metrics.is_some() || other.metrics.is_some() {
            let mut ms = Vec::new();
            for n in 0..top {
                let size = ranks[n] * d;
                let mut m = CMat::zeros(size, size);
                for &(i, j, off) in &summands[n] {
                    let (hc, hd) = (self.metric(i), other.metric(j));
                    let nj = other.ranks[j];
                    let idx = |a: usize, y: usize, al: usize, be: usize| ((off + a * nj + y) * d) + al * d2 + be;
                    for a in 0..self.ranks[i] {
                        for a2 in 0..self.ranks[i] {
                            for y in 0..nj {
                                for y2 in 0..nj {
                                    for al in 0..d1 {
                                        for al2 in 0..d1 {
                                            let c = hc[(a * d1 + al, a2 * d1 + al2)];
                                            if c.norm() == 0.0 {
                                                continue;
                                            }
                                            for be in 0..d2 {
                                                for be2 in 0..d2 {
                                                    m[(idx(a, y, al, be), idx(a2, y2, al2, be2))] += c * hd[(y * d2 + be, y2 * d2 + be2)];
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                ms.push(m);
            }
            out = out.twist_metric(ms)?;
        }
        Ok(out)
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn kernel_dim_tau(m: &CMat, tau: f64) -> usize {
    if tau == tol::KERNEL_TAU {
        return kernel_dim(m);
    }
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    m.ncols() - s.iter().filter(|&&x| x > tau * smax).count()
}

/// Checks `f^{k+1} c^k = d^k f^k` on coefficients.
pub fn check_chain_map(c: &HilbertComplex, d: &HilbertComplex, f: &[EquivariantOperator]) -> Result<()> {
    if c.ranks != d.ranks || c.group != d.group || c.fiber_dim != d.fiber_dim {
        return Err(Error::InvalidInput("chain map between complexes of different shape".into()));
    }
    if f.len() != c.ranks.len() {
        return Err(Error::InvalidInput(format!("{} components for {} degrees", f.len(), c.ranks.len())));
    }
    for (k, fk) in f.iter().enumerate() {
        if fk.source_rank() != c.ranks[k] || fk.target_rank() != d.ranks[k] {
            return Err(Error::InvalidInput(format!("chain map component {k} has the wrong shape")));
        }
    }
    for k in 0..c.differentials.len() {
        let lhs = f[k + 1].compose(&c.differentials[k])?;
        let rhs = d.differentials[k].compose(&f[k])?;
        let scale = (f[k].coefficient_norm() * d.differentials[k].coefficient_norm())
            .max(f[k + 1].coefficient_norm() * c.differentials[k].coefficient_norm())
            .max(1.0);
        let defect = lhs.sub(&rhs)?.coefficient_norm();
        if defect > 1e3 * tol::COMPLEX_TOL * scale {
            return Err(Error::NotChainMap { degree: k, defect });
        }
    }
    Ok(())
}

/// `log T(C) − log T(D)` against `Σ(−1)^k log det f^k − Σ(−1)^k log det H^k(f)`
/// for a chain isomorphism `f : C → D`.
pub fn torsion_compare(c: &HilbertComplex, d: &HilbertComplex, f: &[EquivariantOperator]) -> Result<TorsionComparison> {
    torsion_compare_with(c, d, f, &SpectralConfig::default())
}

pub fn torsion_compare_with(
    c: &HilbertComplex,
    d: &HilbertComplex,
    f: &[EquivariantOperator],
    cfg: &SpectralConfig,
) -> Result<TorsionComparison> {
    c.validated()?;
    d.validated()?;
    check_chain_map(c, d, f)?;
    let lhs = c.l2_torsion_with(cfg)? - d.l2_torsion_with(cfg)?;
    let mut rhs = 0.0;
    for (k, fk) in f.iter().enumerate() {
        let ft = d.metric_root(k, 0.5)?.compose(fk)?.compose(&c.metric_root(k, -0.5)?)?;
        if !fibers_full_rank(&ft, cfg) {
            return Err(Error::NotInvertible { degree: k });
        }
        rhs += sign(k) * fk_det_with(&ft, cfg)?.log_det;
    }
    rhs -= cohomology_log_det_with(c, d, f, cfg)?;
    Ok(TorsionComparison { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// `Σ(−1)^k log det_N H^k(f)` for the map induced by `f` on harmonic representatives.
pub fn cohomology_log_det(c: &HilbertComplex, d: &HilbertComplex, f: &[EquivariantOperator]) -> Result<f64> {
    cohomology_log_det_with(c, d, f, &SpectralConfig::default())
}

pub fn cohomology_log_det_with(c: &HilbertComplex, d: &HilbertComplex, f: &[EquivariantOperator], cfg: &SpectralConfig) -> Result<f64> {
    check_chain_map(c, d, f)?;
    let tc = c.twisted_all()?;
    let td = d.twisted_all()?;
    let mut acc = 0.0;
    for (k, fk) in f.iter().enumerate() {
        let ft = d.metric_root(k, 0.5)?.compose(fk)?.compose(&c.metric_root(k, -0.5)?)?;
        let (bc, kc) = c.harmonic_fibers(&tc, k, cfg);
        let (bd, kd) = d.harmonic_fibers(&td, k, cfg);
        if (bc - bd).abs() > 1e-9 || kc != kd {
            return Err(Error::NotInvertible { degree: k });
        }
        acc += sign(k) * induced_log_det(&tc, &td, &ft, k, &kc, c, cfg)?;
    }
    Ok(acc)
}

fn fibers_full_rank(op: &EquivariantOperator, cfg: &SpectralConfig) -> bool {
    if !op.is_square() {
        return false;
    }
    let fibers = Fibers::new(op);
    let n = op.source_rank() * op.fiber_dim();
    let full = if op.group().has_integers() {
        generic_ranks(&fibers, cfg)
    } else {
        fibers.at(0.0).iter().map(|m| m.ncols() - kernel_dim_tau(m, cfg.tau)).collect()
    };
    let size = if op.group().has_integers() || matches!(op.group().finite_part(), crate::vn_core::FiniteGroup::Cyclic(_)) {
        n
    } else {
        n * op.group().order()
    };
    full.iter().all(|&r| r == size)
}

/// `log det_N H^k(f)` with `H^k(f) = P_D f ι_C` on harmonic representatives.
fn induced_log_det(
    tc: &[EquivariantOperator],
    td: &[EquivariantOperator],
    ft: &EquivariantOperator,
    k: usize,
    dims: &[usize],
    c: &HilbertComplex,
    cfg: &SpectralConfig,
) -> Result<f64> {
    if dims.iter().all(|&x| x == 0) {
        return Ok(0.0);
    }
    let fc = (tc.get(k).map(Fibers::new), if k > 0 { tc.get(k - 1).map(Fibers::new) } else { None });
    let fd = (td.get(k).map(Fibers::new), if k > 0 { td.get(k - 1).map(Fibers::new) } else { None });
    let ff = Fibers::new(ft);
    let cols = c.ranks[k] * c.fiber_dim;
    let stacked = |pair: &(Option<Fibers<'_>>, Option<Fibers<'_>>), theta: f64, i: usize| -> CMat {
        let top = pair.0.as_ref().map(|f| f.at(theta)[i].clone()).unwrap_or_else(|| CMat::zeros(0, cols));
        let bot = pair.1.as_ref().map(|f| f.at(theta)[i].adjoint()).unwrap_or_else(|| CMat::zeros(0, cols));
        let mut s = CMat::zeros(top.nrows() + bot.nrows(), cols);
        s.view_mut((0, 0), top.shape()).copy_from(&top);
        s.view_mut((top.nrows(), 0), bot.shape()).copy_from(&bot);
        s
    };
    let w = ft.fiber_weight();
    let value_at = |theta: f64| -> f64 {
        let fm = ff.at(theta);
        let mut acc = 0.0;
        for (i, &dim) in dims.iter().enumerate() {
            if dim == 0 {
                continue;
            }
            let n = fm[i].ncols();
            let uc = harmonic_basis(&stacked(&fc, theta, i), n, dim);
            let ud = harmonic_basis(&stacked(&fd, theta, i), n, dim);
            let h = ud.adjoint() * &fm[i] * uc;
            acc += singular_values(&h).iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).sum::<f64>();
        }
        w * acc
    };
    if !c.group.has_integers() {
        return Ok(value_at(0.0));
    }
    let res = circle_mean(value_at, &cfg.quad);
    if !res.converged {
        return Err(Error::NonConvergence { what: "induced map on cohomology".into(), achieved: res.error_estimate });
    }
    Ok(res.value)
}

fn harmonic_basis(stacked: &CMat, n: usize, dim: usize) -> CMat {
    if stacked.nrows() == 0 {
        return CMat::identity(n, n).columns(0, dim).into_owned();
    }
    crate::linalg::kernel_basis(stacked, Some(dim))
}

/// Identity-element check used by property tests: every coefficient of `op` below `tol`.
pub fn is_zero_operator(op: &EquivariantOperator, tol: f64) -> bool {
    op.terms().all(|(_, _, _, b)| max_abs(b) <= tol)
}
