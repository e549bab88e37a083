//! Seeded random inputs for the property suites: integral complexes over
//! finite group rings, Morse systems built on them, metrics and chain
//! isomorphisms. A fixed seed reproduces every draw.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hilbert_complex::HilbertComplex;
use crate::linalg::{c64, CMat};
use crate::morse_smale::{CriticalOrbit, MorseSystem, Representation};
use crate::vn_core::{Elem, EquivariantOperator, GroupSpec};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub max_group_order: usize,
    pub max_fiber_dim: usize,
    pub max_rank: usize,
    /// Largest number of nonzero degrees.
    pub max_length: usize,
    /// Elementary row operations applied per degree.
    pub shuffles: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_group_order: 3, max_fiber_dim: 2, max_rank: 3, max_length: 3, shuffles: 4 }
    }
}

type RingElem = BTreeMap<Elem, i64>;

/// A matrix over `ℤ[Γ]` for a finite `Γ`.
#[derive(Debug, Clone)]
struct RingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RingElem>,
}

impl RingMatrix {
    fn zero(rows: usize, cols: usize) -> Self {
        RingMatrix { rows, cols, entries: vec![RingElem::new(); rows * cols] }
    }

    fn identity(group: &GroupSpec, n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.entries[i * n + i].insert(group.one(), 1);
        }
        m
    }

    fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.entries[i * self.cols + j]
    }

    fn add(&mut self, i: usize, j: usize, g: Elem, n: i64) {
        let e = &mut self.entries[i * self.cols + j];
        *e.entry(g).or_default() += n;
        if e[&g] == 0 {
            e.remove(&g);
        }
    }

    fn mul(&self, rhs: &Self, group: &GroupSpec) -> Self {
        let mut out = Self::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                for (&g, &a) in self.get(i, l) {
                    for j in 0..rhs.cols {
                        for (&h, &b) in rhs.get(l, j) {
                            out.add(i, j, group.mul(g, h), a * b);
                        }
                    }
                }
            }
        }
        out
    }
}

/// A cochain complex over `ℤ[Γ]`, stored as the nonzero coefficients
/// `(row, column, g, n)` of each differential.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralComplex {
    pub group: GroupSpec,
    pub ranks: Vec<usize>,
    pub differentials: Vec<Vec<(usize, usize, Elem, i64)>>,
}

fn random_elem(rng: &mut SeededRng, group: &GroupSpec) -> Elem {
    Elem::g(rng.random_range(0..group.order()))
}

fn random_sign(rng: &mut SeededRng) -> i64 {
    if rng.random_bool(0.5) {
        1
    } else {
        -1
    }
}

/// Trivial group or `ℤ/n` with `n ≤ max_group_order`.
pub fn random_group(rng: &mut SeededRng, cfg: &GenConfig) -> GroupSpec {
    let n = rng.random_range(1..=cfg.max_group_order.max(1));
    if n == 1 {
        GroupSpec::trivial()
    } else {
        GroupSpec::cyclic(n).expect("positive order")
    }
}

/// Product of random transvections `I + n g E_ij` and its exact inverse.
fn random_unimodular(rng: &mut SeededRng, group: &GroupSpec, n: usize, steps: usize) -> (RingMatrix, RingMatrix) {
    let mut u = RingMatrix::identity(group, n);
    let mut v = RingMatrix::identity(group, n);
    if n < 2 {
        return (u, v);
    }
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let g = random_elem(rng, group);
        let c = random_sign(rng) * rng.random_range(1..=2);
        let mut t = RingMatrix::identity(group, n);
        t.add(i, j, g, c);
        let mut tinv = RingMatrix::identity(group, n);
        tinv.add(i, j, g, -c);
        u = t.mul(&u, group);
        v = v.mul(&tinv, group);
    }
    (u, v)
}

/// A random complex `U_{k+1} E_k U_k⁻¹` where `E_k` pairs basis vectors
/// with coefficients `±n g`. With `acyclic` every basis vector is paired.
pub fn random_integral_complex(rng: &mut SeededRng, group: &GroupSpec, cfg: &GenConfig, acyclic: bool) -> IntegralComplex {
    let len = rng.random_range(2..=cfg.max_length.max(2));
    let (ranks, pairs) = if acyclic {
        let half = (cfg.max_rank / 2).max(1);
        let pairs: Vec<usize> = (0..len - 1).map(|_| rng.random_range(1..=half)).collect();
        let ranks = (0..len).map(|k| if k > 0 { pairs[k - 1] } else { 0 } + pairs.get(k).copied().unwrap_or(0)).collect();
        (ranks, pairs)
    } else {
        let ranks: Vec<usize> = (0..len).map(|_| rng.random_range(1..=cfg.max_rank.max(1))).collect();
        let mut pairs = Vec::new();
        let mut prev = 0;
        for k in 0..len - 1 {
            let s = rng.random_range(0..=(ranks[k] - prev).min(ranks[k + 1]));
            pairs.push(s);
            prev = s;
        }
        (ranks, pairs)
    };
    let bases: Vec<_> = ranks.iter().map(|&m| random_unimodular(rng, group, m, cfg.shuffles)).collect();
    let mut differentials = Vec::new();
    for k in 0..len - 1 {
        let mut e = RingMatrix::zero(ranks[k + 1], ranks[k]);
        let offset = if k > 0 { pairs[k - 1] } else { 0 };
        for i in 0..pairs[k] {
            let n = random_sign(rng) * rng.random_range(1..=3);
            e.add(i, offset + i, random_elem(rng, group), n);
        }
        let c = bases[k + 1].0.mul(&e, group).mul(&bases[k].1, group);
        let mut terms = Vec::new();
        for i in 0..c.rows {
            for j in 0..c.cols {
                for (&g, &n) in c.get(i, j) {
                    terms.push((i, j, g, n));
                }
            }
        }
        differentials.push(terms);
    }
    IntegralComplex { group: group.clone(), ranks, differentials }
}

fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// A random positive definite Hermitian `n × n` matrix, `A A* + I/2`.
pub fn random_metric(rng: &mut SeededRng, n: usize) -> CMat {
    let a = random_matrix(rng, n, n);
    &a * a.adjoint() + CMat::identity(n, n) * c64(0.5, 0.0)
}

/// A non-unitary representation `S D S⁻¹` of `ℤ/n` with `D` a diagonal of
/// `n`-th roots of unity; the trivial representation for the trivial group.
pub fn random_representation(rng: &mut SeededRng, group: &GroupSpec, d: usize) -> Result<Representation> {
    let n = group.order();
    if n == 1 {
        return Ok(Representation::trivial(group, d));
    }
    let s = loop {
        let s = random_matrix(rng, d, d) + CMat::identity(d, d) * c64(1.5, 0.0);
        if let Some(inv) = s.clone().try_inverse() {
            break (s, inv);
        }
    };
    let diag = CMat::from_fn(d, d, |i, j| {
        if i == j {
            let k = rng.random_range(0..n) as f64;
            c64(0.0, std::f64::consts::TAU * k / n as f64).exp()
        } else {
            c64(0.0, 0.0)
        }
    });
    let gen = &s.0 * diag * &s.1;
    let label = group.label(Elem::g(1));
    Representation::from_generators(group, d, &[(label, Elem::g(1), gen)], None)
}

/// A Morse system whose incidence is a random integral complex, with a
/// random representation and random orbit metrics.
pub fn random_morse_system(rng: &mut SeededRng, cfg: &GenConfig, acyclic: bool) -> Result<MorseSystem> {
    let group = random_group(rng, cfg);
    let d = rng.random_range(1..=cfg.max_fiber_dim.max(1));
    let ic = random_integral_complex(rng, &group, cfg, acyclic);
    let rep = random_representation(rng, &group, d)?;
    morse_system_on(rng, &ic, rep)
}

/// Morse system with the incidence of `ic`, orbits named `x{k}_{i}`.
pub fn morse_system_on(rng: &mut SeededRng, ic: &IntegralComplex, rep: Representation) -> Result<MorseSystem> {
    let d = rep.dim();
    let mut ms = MorseSystem::new(ic.group.clone(), rep);
    let mut pos = Vec::new();
    for (k, &m) in ic.ranks.iter().enumerate() {
        pos.push((0..m).map(|i| ms.add_orbit(CriticalOrbit::new(&format!("x{k}_{i}"), k, random_metric(rng, d)))).collect::<Vec<_>>());
    }
    for (k, terms) in ic.differentials.iter().enumerate() {
        for &(i, j, g, n) in terms {
            ms.add_incidence(pos[k][j], pos[k + 1][i], &[(g, n)]);
        }
    }
    Ok(ms)
}

/// Random metrics for every orbit of `ms`.
pub fn random_orbit_metrics(rng: &mut SeededRng, ms: &MorseSystem) -> Vec<CMat> {
    (0..ms.orbits.len()).map(|_| random_metric(rng, ms.fiber_dim())).collect()
}

/// The Morse–Smale complex of a random Morse system.
pub fn random_complex(rng: &mut SeededRng, cfg: &GenConfig, acyclic: bool) -> Result<HilbertComplex> {
    random_morse_system(rng, cfg, acyclic)?.build_ms_complex()
}

/// A random invertible operator on `L²(Γ)^m ⊗ ℂ^d`: a dominant diagonal
/// plus random group-ring terms.
pub fn random_automorphism(
    rng: &mut SeededRng,
    group: &GroupSpec,
    m: usize,
    d: usize,
) -> Result<(EquivariantOperator, EquivariantOperator)> {
    loop {
        let mut f = EquivariantOperator::zero(group.clone(), m, m, d);
        for i in 0..m {
            let scale = rng.random_range(0.5..2.0);
            f.add_term(i, i, group.one(), CMat::identity(d, d) * c64(scale, 0.0) + random_matrix(rng, d, d) * c64(0.2, 0.0))?;
            for j in 0..m {
                if rng.random_bool(0.4) {
                    f.add_term(i, j, random_elem(rng, group), random_matrix(rng, d, d) * c64(0.3, 0.0))?;
                }
            }
        }
        if let Ok(inv) = f.inverse() {
            return Ok((f, inv));
        }
    }
}

/// A complex `D` with random metrics and a chain isomorphism `f : C → D`,
/// obtained by transporting the differentials of `C` along random automorphisms.
pub fn random_chain_isomorphism(rng: &mut SeededRng, c: &HilbertComplex) -> Result<(HilbertComplex, Vec<EquivariantOperator>)> {
    let group = c.group().clone();
    let d = c.fiber_dim();
    let mut fs = Vec::new();
    let mut invs = Vec::new();
    for &m in c.ranks() {
        let (f, inv) = random_automorphism(rng, &group, m, d)?;
        fs.push(f);
        invs.push(inv);
    }
    let diffs = c
        .differentials()
        .iter()
        .enumerate()
        .map(|(k, ck)| Ok(fs[k + 1].compose(ck)?.compose(&invs[k])?.pruned(0.0)))
        .collect::<Result<Vec<_>>>()?;
    let metrics = c.ranks().iter().map(|&m| random_metric(rng, m * d)).collect();
    let target = HilbertComplex::new(group, d, c.ranks().to_vec(), diffs)?.twist_metric(metrics)?;
    Ok((target, fs))
}
