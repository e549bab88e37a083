//! Equivariant Morse–Smale cochain complexes with flat-bundle coefficients.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::hilbert_complex::{cohomology_log_det, HilbertComplex};
use crate::linalg::{block_diag, c64, check_positive_definite, log_det_hpd, max_abs, CMat};
use crate::vn_core::{Elem, EquivariantOperator, GroupSpec};

/// A representation ρ of `Γ = F × ℤ^ε` on `ℂ^d`, stored as the image of
/// every finite element plus the image of the ℤ generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    dim: usize,
    finite: Vec<CMat>,
    z: Option<CMat>,
    z_inv: Option<CMat>,
    generators: Vec<(String, Elem)>,
}

impl Representation {
    pub fn trivial(group: &GroupSpec, dim: usize) -> Self {
        let id = CMat::identity(dim, dim);
        let mut generators = Vec::new();
        if group.has_integers() {
            generators.push(("z".to_string(), Elem::z(1)));
        }
        if group.order() > 1 {
            for x in 0..group.order() {
                generators.push((group.label(Elem::g(x)), Elem::g(x)));
            }
        }
        Representation {
            dim,
            finite: vec![id.clone(); group.order()],
            z: group.has_integers().then(|| id.clone()),
            z_inv: group.has_integers().then_some(id),
            generators,
        }
    }

    /// Builds ρ from generator images. Finite generators are `(label, element,
    /// matrix)`; the images of all finite elements are generated by closure and
    /// every relation of the multiplication table is checked along the way.
    pub fn from_generators(group: &GroupSpec, dim: usize, finite_generators: &[(String, Elem, CMat)], z: Option<CMat>) -> Result<Self> {
        let n = group.order();
        let shape_ok = |m: &CMat| m.shape() == (dim, dim);
        let mut images: Vec<Option<CMat>> = vec![None; n];
        images[group.one().finite] = Some(CMat::identity(dim, dim));
        for (label, g, m) in finite_generators {
            if !shape_ok(m) {
                return Err(Error::InvalidInput(format!("generator {label} has shape {:?}", m.shape())));
            }
            if g.power != 0 || g.finite >= n {
                return Err(Error::InvalidInput(format!("generator {label} is not an element of the finite factor")));
            }
        }
        let tol = 1e-9;
        let mut queue = VecDeque::from([group.one().finite]);
        while let Some(x) = queue.pop_front() {
            let rx = images[x].clone().expect("queued elements have images");
            for (label, g, m) in finite_generators {
                let y = group.mul_finite(g.finite, x);
                let ry = m * &rx;
                match &images[y] {
                    Some(old) => {
                        if max_abs(&(old - &ry)) > tol * max_abs(old).max(1.0) {
                            return Err(Error::InvalidInput(format!(
                                "generator images violate the group relations (at {label}·{})",
                                group.label(Elem::g(x))
                            )));
                        }
                    }
                    None => {
                        images[y] = Some(ry);
                        queue.push_back(y);
                    }
                }
            }
        }
        let finite: Vec<CMat> = images
            .into_iter()
            .enumerate()
            .map(|(x, m)| m.ok_or_else(|| Error::InvalidInput(format!("element {} is not generated", group.label(Elem::g(x))))))
            .collect::<Result<_>>()?;
        let (z, z_inv) = match (group.has_integers(), z) {
            (true, Some(m)) => {
                if !shape_ok(&m) {
                    return Err(Error::InvalidInput(format!("holonomy has shape {:?}", m.shape())));
                }
                let inv = m.clone().try_inverse().ok_or_else(|| Error::InvalidInput("holonomy is not invertible".into()))?;
                for f in &finite {
                    if max_abs(&(f * &m - &m * f)) > tol * max_abs(&m).max(1.0) {
                        return Err(Error::InvalidInput("holonomy must commute with the finite factor".into()));
                    }
                }
                (Some(m), Some(inv))
            }
            (true, None) => (Some(CMat::identity(dim, dim)), Some(CMat::identity(dim, dim))),
            (false, Some(_)) => return Err(Error::InvalidInput("holonomy given for a finite group".into())),
            (false, None) => (None, None),
        };
        let mut generators: Vec<(String, Elem)> = finite_generators.iter().map(|(l, g, _)| (l.clone(), *g)).collect();
        if group.has_integers() {
            generators.push(("z".into(), Elem::z(1)));
        }
        Ok(Representation { dim, finite, z, z_inv, generators })
    }

    /// Representation of ℤ by a single holonomy matrix.
    pub fn holonomy(z: CMat) -> Result<Self> {
        let d = z.nrows();
        Self::from_generators(&GroupSpec::integers(), d, &[], Some(z))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[(String, Elem)] {
        &self.generators
    }

    pub fn generator(&self, label: &str) -> Option<Elem> {
        self.generators.iter().find(|g| g.0 == label).map(|g| g.1)
    }

    /// `ρ(γ)`.
    pub fn image(&self, g: Elem) -> CMat {
        let mut m = self.finite[g.finite].clone();
        if g.power != 0 {
            let base = if g.power > 0 { self.z.as_ref() } else { self.z_inv.as_ref() };
            let base = base.expect("ℤ-powers only occur over groups containing ℤ");
            for _ in 0..g.power.unsigned_abs() {
                m = &m * base;
            }
        }
        m
    }
}

/// One letter of a path word: a declared generator and an exponent ±1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Letter {
    pub generator: String,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: &str) -> Self {
        Letter { generator: generator.to_string(), inverse: false }
    }

    pub fn inv(generator: &str) -> Self {
        Letter { generator: generator.to_string(), inverse: true }
    }
}

/// Parses whitespace-separated letters such as `"z g^-1"`.
pub fn parse_word(word: &str) -> Vec<Letter> {
    word.split_whitespace()
        .map(|t| match t.strip_suffix("^-1") {
            Some(g) => Letter::inv(g),
            None => Letter::new(t),
        })
        .collect()
}

/// Ordered product `ρ(g₁)^{±1} ρ(g₂)^{±1} ⋯`.
pub fn parallel_transport(word: &[Letter], rep: &Representation) -> Result<CMat> {
    let mut m = CMat::identity(rep.dim, rep.dim);
    for l in word {
        let g = rep.generator(&l.generator).ok_or_else(|| Error::InvalidInput(format!("unknown generator {}", l.generator)))?;
        let r = rep.image(g);
        let r = if l.inverse { r.try_inverse().ok_or(Error::NotInvertible { degree: 0 })? } else { r };
        m *= r;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalOrbit {
    pub label: String,
    pub index: usize,
    /// Hermitian metric `h(p)` on the fiber.
    pub metric: CMat,
    /// Orientation sign `O_p = ±1`.
    pub orientation: i8,
}

impl CriticalOrbit {
    pub fn new(label: &str, index: usize, metric: CMat) -> Self {
        CriticalOrbit { label: label.to_string(), index, metric, orientation: 1 }
    }
}

/// `n(p, q) = Σ n_γ γ` for orbits `p → q` with `ind q = ind p + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub from: usize,
    pub to: usize,
    pub terms: Vec<(Elem, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseSystem {
    pub group: GroupSpec,
    pub rep: Representation,
    pub orbits: Vec<CriticalOrbit>,
    pub incidence: Vec<Incidence>,
}

impl MorseSystem {
    pub fn new(group: GroupSpec, rep: Representation) -> Self {
        MorseSystem { group, rep, orbits: Vec::new(), incidence: Vec::new() }
    }

    pub fn fiber_dim(&self) -> usize {
        self.rep.dim
    }

    /// Adds an orbit and returns its position.
    pub fn add_orbit(&mut self, orbit: CriticalOrbit) -> usize {
        self.orbits.push(orbit);
        self.orbits.len() - 1
    }

    pub fn add_incidence(&mut self, from: usize, to: usize, terms: &[(Elem, i64)]) {
        self.incidence.push(Incidence { from, to, terms: terms.to_vec() });
    }

    pub fn orbit_by_label(&self, label: &str) -> Option<usize> {
        self.orbits.iter().position(|o| o.label == label)
    }

    /// Top degree of the complex (largest index present).
    pub fn top_index(&self) -> Option<usize> {
        self.orbits.iter().map(|o| o.index).max()
    }

    /// Morse counts `m_k`.
    pub fn morse_counts(&self) -> Vec<usize> {
        let mut m = vec![0; self.top_index().map_or(0, |t| t + 1)];
        for o in &self.orbits {
            m[o.index] += 1;
        }
        m
    }

    pub fn metrics(&self) -> Vec<CMat> {
        self.orbits.iter().map(|o| o.metric.clone()).collect()
    }

    /// Same system with the orbit metrics replaced.
    pub fn with_metrics(&self, metrics: &[CMat]) -> Result<Self> {
        if metrics.len() != self.orbits.len() {
            return Err(Error::InvalidInput(format!("{} metrics for {} orbits", metrics.len(), self.orbits.len())));
        }
        let mut out = self.clone();
        for (o, m) in out.orbits.iter_mut().zip(metrics) {
            o.metric = m.clone();
        }
        Ok(out)
    }

    /// Aggregated incidence `n(p, q)` as a map over the group ring.
    fn incidence_map(&self) -> BTreeMap<(usize, usize), BTreeMap<Elem, i64>> {
        let mut map: BTreeMap<(usize, usize), BTreeMap<Elem, i64>> = BTreeMap::new();
        for inc in &self.incidence {
            let e = map.entry((inc.from, inc.to)).or_default();
            for &(g, n) in &inc.terms {
                *e.entry(g).or_default() += n;
            }
        }
        for e in map.values_mut() {
            e.retain(|_, n| *n != 0);
        }
        map
    }

    /// Verifies the grading, the metrics and `∂² = 0` over the integral group ring.
    pub fn check_ms_axioms(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let d = self.rep.dim;
        for (i, o) in self.orbits.iter().enumerate() {
            if self.orbits[..i].iter().any(|p| p.label == o.label) {
                errs.push(format!("duplicate orbit label {}", o.label));
            }
            if o.orientation != 1 && o.orientation != -1 {
                errs.push(format!("orbit {} has orientation {} (expected ±1)", o.label, o.orientation));
            }
            if o.metric.shape() != (d, d) {
                errs.push(format!("orbit {} has a metric of shape {:?}", o.label, o.metric.shape()));
            } else if let Err(e) = check_positive_definite(&o.metric, &format!("metric at {}", o.label)) {
                errs.push(e.to_string());
            }
        }
        let n = self.orbits.len();
        for inc in &self.incidence {
            if inc.from >= n || inc.to >= n {
                errs.push(format!("incidence ({}, {}) refers to a missing orbit", inc.from, inc.to));
                continue;
            }
            let (p, q) = (&self.orbits[inc.from], &self.orbits[inc.to]);
            if q.index != p.index + 1 {
                errs.push(format!("index gap: incidence {} (index {}) -> {} (index {})", p.label, p.index, q.label, q.index));
            }
            for (g, _) in &inc.terms {
                if !self.group.contains(*g) {
                    errs.push(format!("incidence {} -> {} uses an element outside {}", p.label, q.label, self.group));
                }
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let map = self.incidence_map();
        for p in 0..n {
            for s in 0..n {
                if self.orbits[s].index != self.orbits[p].index + 2 {
                    continue;
                }
                let mut acc: BTreeMap<Elem, i64> = BTreeMap::new();
                for r in 0..n {
                    let (Some(a), Some(b)) = (map.get(&(p, r)), map.get(&(r, s))) else { continue };
                    for (&g, &ng) in b {
                        for (&h, &nh) in a {
                            *acc.entry(self.group.mul(g, h)).or_default() += ng * nh;
                        }
                    }
                }
                if acc.values().any(|&v| v != 0) {
                    errs.push(format!("boundary squared does not vanish from {} to {}", self.orbits[p].label, self.orbits[s].label));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Positions of the orbits of each index, in declaration order.
    fn by_degree(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.top_index().map_or(0, |t| t + 1)];
        for (i, o) in self.orbits.iter().enumerate() {
            out[o.index].push(i);
        }
        out
    }

    /// The L²-Morse–Smale cochain complex with inner metrics `⊕ h(p)`.
    pub fn build_ms_complex(&self) -> Result<HilbertComplex> {
        self.check_ms_axioms().map_err(Error::Validation)?;
        let d = self.rep.dim;
        let degrees = self.by_degree();
        let ranks: Vec<usize> = degrees.iter().map(Vec::len).collect();
        let mut local = vec![0; self.orbits.len()];
        for deg in &degrees {
            for (j, &i) in deg.iter().enumerate() {
                local[i] = j;
            }
        }
        let mut diffs: Vec<EquivariantOperator> =
            ranks.windows(2).map(|w| EquivariantOperator::zero(self.group.clone(), w[1], w[0], d)).collect();
        for ((p, q), terms) in self.incidence_map() {
            let k = self.orbits[p].index;
            let sign = (self.orbits[p].orientation * self.orbits[q].orientation) as f64;
            for (g, n) in terms {
                diffs[k].add_term(local[q], local[p], g, self.rep.image(g) * c64(sign * n as f64, 0.0))?;
            }
        }
        let c = HilbertComplex::new(self.group.clone(), d, ranks, diffs)?;
        if degrees.is_empty() {
            return Ok(c);
        }
        let metrics =
            degrees.iter().map(|deg| block_diag(&deg.iter().map(|&i| self.orbits[i].metric.clone()).collect::<Vec<_>>())).collect();
        c.twist_metric(metrics)
    }

    /// `log T^MS = Σ_k (−1)^{k+1} log det_N(∂^k)`.
    pub fn ms_torsion(&self) -> Result<f64> {
        Ok(-self.build_ms_complex()?.l2_torsion()?)
    }

    /// `(Σ(−1)^k m_k d, Σ(−1)^k m_k)`.
    pub fn euler_characteristics(&self) -> (i64, i64) {
        let chi: i64 = self.morse_counts().iter().enumerate().map(|(k, &m)| if k % 2 == 0 { m as i64 } else { -(m as i64) }).sum();
        (chi * self.rep.dim as i64, chi)
    }

    /// `Σ_p (−1)^{ind p} log det(h₁(p)⁻¹ h₂(p))`.
    pub fn metric_anomaly(&self, h1: &[CMat], h2: &[CMat]) -> Result<f64> {
        metric_anomaly_of(&self.orbits, h1, h2)
    }

    /// The torsion-level side of the metric anomaly:
    /// `2·(log T^MS(h₂) − log T^MS(h₁) + Σ(−1)^k log det H^k(id))`, where
    /// `id` runs from the `h₁`- to the `h₂`-normed complex.
    pub fn metric_anomaly_via_torsion(&self, h1: &[CMat], h2: &[CMat]) -> Result<f64> {
        let s1 = self.with_metrics(h1)?;
        let s2 = self.with_metrics(h2)?;
        let c1 = s1.build_ms_complex()?;
        let c2 = s2.build_ms_complex()?;
        let ids: Vec<EquivariantOperator> =
            c1.ranks().iter().map(|&m| EquivariantOperator::identity(self.group.clone(), m, self.rep.dim)).collect();
        let h = cohomology_log_det(&c1, &c2, &ids)?;
        Ok(2.0 * (s2.ms_torsion()? - s1.ms_torsion()? + h))
    }

    /// Refines the system. Returns the new system and `ω(y)` for every orbit
    /// of the refined system (zero for orbits kept from the original).
    pub fn subdivide(&self, scheme: &SubdivisionScheme) -> Result<(MorseSystem, Vec<f64>)> {
        scheme.check(self)?;
        let mut out = self.clone();
        out.incidence.clear();
        let mut omega = vec![0.0; self.orbits.len()];
        for child in &scheme.children {
            let parent = &self.orbits[child.parent];
            let t = parallel_transport(&child.word, &self.rep)?;
            let tinv = t.try_inverse().ok_or(Error::NotInvertible { degree: child.index })?;
            let transported = tinv.adjoint() * &parent.metric * &tinv;
            let w = log_det_hpd(&child.metric) - log_det_hpd(&transported);
            out.orbits.push(CriticalOrbit {
                label: child.label.clone(),
                index: child.index,
                metric: child.metric.clone(),
                orientation: child.orientation,
            });
            omega.push(w);
        }
        let pos = |label: &str| {
            out.orbits
                .iter()
                .position(|o| o.label == label)
                .ok_or_else(|| Error::InvalidInput(format!("unknown orbit {label} in subdivision incidence")))
        };
        let mut inc = Vec::new();
        for (from, to, terms) in &scheme.incidence {
            inc.push(Incidence { from: pos(from)?, to: pos(to)?, terms: terms.clone() });
        }
        out.incidence = inc;
        if scheme.children.is_empty() && scheme.incidence.is_empty() {
            out.incidence = self.incidence.clone();
        }
        out.check_ms_axioms().map_err(Error::Validation)?;
        Ok((out, omega))
    }

    /// Metric `h̃(y)` transported from the parent of each child, the correction
    /// that makes every `ω(y)` vanish.
    pub fn transported_metrics(&self, scheme: &SubdivisionScheme) -> Result<Vec<CMat>> {
        scheme.check(self)?;
        let mut out: Vec<CMat> = self.metrics();
        for child in &scheme.children {
            let t = parallel_transport(&child.word, &self.rep)?;
            let tinv = t.try_inverse().ok_or(Error::NotInvertible { degree: child.index })?;
            out.push(tinv.adjoint() * &self.orbits[child.parent].metric * &tinv);
        }
        Ok(out)
    }
}

pub(crate) fn metric_anomaly_of(orbits: &[CriticalOrbit], h1: &[CMat], h2: &[CMat]) -> Result<f64> {
    if h1.len() != orbits.len() || h2.len() != orbits.len() {
        return Err(Error::InvalidInput(format!("metric families of length {} and {} for {} orbits", h1.len(), h2.len(), orbits.len())));
    }
    let mut acc = 0.0;
    for (o, (a, b)) in orbits.iter().zip(h1.iter().zip(h2)) {
        if a.shape() != b.shape() {
            return Err(Error::InvalidInput(format!("metric dimension mismatch at {}", o.label)));
        }
        check_positive_definite(a, &o.label)?;
        check_positive_definite(b, &o.label)?;
        let s = if o.index % 2 == 0 { 1.0 } else { -1.0 };
        acc += s * (log_det_hpd(b) - log_det_hpd(a));
    }
    Ok(acc)
}

/// A new critical orbit created by a subdivision.
#[derive(Debug, Clone, PartialEq)]
pub struct Child {
    pub label: String,
    pub index: usize,
    /// Position of the parent orbit in the original system.
    pub parent: usize,
    /// Path from the parent to the child.
    pub word: Vec<Letter>,
    /// User-chosen metric `h(y)`.
    pub metric: CMat,
    pub orientation: i8,
}

impl Child {
    pub fn new(label: &str, index: usize, parent: usize, word: Vec<Letter>, metric: CMat) -> Self {
        Child { label: label.to_string(), index, parent, word, metric, orientation: 1 }
    }
}

/// New orbits with their parents and path words, plus the complete incidence
/// data of the refined system by orbit label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubdivisionScheme {
    pub children: Vec<Child>,
    pub incidence: Vec<(String, String, Vec<(Elem, i64)>)>,
}

impl SubdivisionScheme {
    /// Children lie in the descending cell of their parent, so their index is
    /// at least the parent's; labels must be fresh.
    pub fn check(&self, ms: &MorseSystem) -> Result<()> {
        let mut errs = Vec::new();
        for c in &self.children {
            match ms.orbits.get(c.parent) {
                None => errs.push(format!("child {} has no parent {}", c.label, c.parent)),
                Some(p) if c.index < p.index => {
                    errs.push(format!("child {} of index {} cannot lie in the cell of {} (index {})", c.label, c.index, p.label, p.index))
                }
                _ => {}
            }
            if ms.orbit_by_label(&c.label).is_some() || self.children.iter().filter(|d| d.label == c.label).count() > 1 {
                errs.push(format!("child label {} is not fresh", c.label));
            }
            if c.metric.shape() != (ms.rep.dim, ms.rep.dim) {
                errs.push(format!("child {} has a metric of shape {:?}", c.label, c.metric.shape()));
            }
            for l in &c.word {
                if ms.rep.generator(&l.generator).is_none() {
                    errs.push(format!("unknown generator {} in the word of {}", l.generator, c.label));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}
