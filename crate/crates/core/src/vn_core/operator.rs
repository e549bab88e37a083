use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::group::{Elem, FiniteGroup, GroupSpec};
use crate::error::{Error, Result};
use crate::linalg::{c64, max_abs, CMat, C64};

/// Coefficients of one matrix entry: a finitely supported sum Σ g·B_g with
/// `d × d` complex blocks.
pub type Coeffs = BTreeMap<Elem, CMat>;

/// An `m′ × m` matrix over ℂ[Γ] ⊗ End(ℂ^d), acting on `L²(Γ)^m ⊗ ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantOperator {
    group: GroupSpec,
    source_rank: usize,
    target_rank: usize,
    fiber_dim: usize,
    entries: Vec<Coeffs>,
}

/// Concrete form of an operator: a Laurent polynomial Σ e^{ikθ} A_k whose
/// coefficients are matrices of the left regular representation of the
/// finite factor. Finite groups have the single coefficient `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub finite_order: usize,
    pub rows: usize,
    pub cols: usize,
    pub coefficients: Vec<(i64, CMat)>,
}

impl Realization {
    /// `M(θ)`.
    pub fn at(&self, theta: f64) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        for (k, a) in &self.coefficients {
            m += a * C64::from_polar(1.0, *k as f64 * theta);
        }
        m
    }

    /// The matrix itself when no ℤ factor is present.
    pub fn matrix(&self) -> Option<CMat> {
        self.coefficients.iter().all(|(k, _)| *k == 0).then(|| self.at(0.0))
    }

    /// Number of uniform nodes integrating every trace of `M(θ)` exactly.
    pub fn exact_nodes(&self) -> usize {
        let lo = self.coefficients.iter().map(|c| c.0).min().unwrap_or(0);
        let hi = self.coefficients.iter().map(|c| c.0).max().unwrap_or(0);
        (2 * (hi - lo) + 2) as usize
    }
}

impl EquivariantOperator {
    /// The zero operator `L²(Γ)^source → L²(Γ)^target` with fiber `ℂ^d`.
    pub fn zero(group: GroupSpec, target_rank: usize, source_rank: usize, fiber_dim: usize) -> Self {
        EquivariantOperator { group, source_rank, target_rank, fiber_dim, entries: vec![Coeffs::new(); target_rank * source_rank] }
    }

    pub fn scalar(group: GroupSpec, rank: usize, fiber_dim: usize, value: C64) -> Self {
        let one = group.one();
        let mut op = Self::zero(group, rank, rank, fiber_dim);
        if value != C64::new(0.0, 0.0) {
            for i in 0..rank {
                op.entries[i * rank + i].insert(one, CMat::identity(fiber_dim, fiber_dim) * value);
            }
        }
        op
    }

    pub fn identity(group: GroupSpec, rank: usize, fiber_dim: usize) -> Self {
        Self::scalar(group, rank, fiber_dim, c64(1.0, 0.0))
    }

    /// A rank-one scalar operator Σ a_g g.
    pub fn group_ring(group: GroupSpec, terms: &[(Elem, C64)]) -> Result<Self> {
        let mut op = Self::zero(group, 1, 1, 1);
        for &(g, a) in terms {
            op.add_term(0, 0, g, CMat::from_element(1, 1, a))?;
        }
        Ok(op)
    }

    /// A rank-one scalar Laurent polynomial Σ a_k z^k over ℤ.
    pub fn laurent(terms: &[(i64, f64)]) -> Self {
        let t: Vec<_> = terms.iter().map(|&(k, a)| (Elem::z(k), c64(a, 0.0))).collect();
        Self::group_ring(GroupSpec::integers(), &t).expect("integer powers are valid elements")
    }

    /// Operator with a single constant (identity-element) block matrix of size
    /// `(target·d) × (source·d)`.
    pub fn constant(group: GroupSpec, target_rank: usize, source_rank: usize, fiber_dim: usize, m: &CMat) -> Result<Self> {
        let d = fiber_dim;
        if m.shape() != (target_rank * d, source_rank * d) {
            return Err(Error::InvalidInput(format!(
                "constant block has shape {:?}, expected ({}, {})",
                m.shape(),
                target_rank * d,
                source_rank * d
            )));
        }
        let one = group.one();
        let mut op = Self::zero(group, target_rank, source_rank, d);
        for i in 0..target_rank {
            for j in 0..source_rank {
                let b = m.view((i * d, j * d), (d, d)).into_owned();
                op.add_term(i, j, one, b)?;
            }
        }
        Ok(op)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn is_square(&self) -> bool {
        self.source_rank == self.target_rank
    }

    /// von Neumann dimension of the source module, `m·d`.
    pub fn source_dim(&self) -> f64 {
        (self.source_rank * self.fiber_dim) as f64
    }

    pub fn target_dim(&self) -> f64 {
        (self.target_rank * self.fiber_dim) as f64
    }

    pub fn entry(&self, row: usize, col: usize) -> &Coeffs {
        &self.entries[row * self.source_rank + col]
    }

    /// Adds `g·block` to entry `(row, col)`.
    pub fn add_term(&mut self, row: usize, col: usize, g: Elem, block: CMat) -> Result<()> {
        if row >= self.target_rank || col >= self.source_rank {
            return Err(Error::InvalidInput(format!("entry ({row}, {col}) outside a {}x{} operator", self.target_rank, self.source_rank)));
        }
        if block.shape() != (self.fiber_dim, self.fiber_dim) {
            return Err(Error::InvalidInput(format!("block of shape {:?} in a fiber of dimension {}", block.shape(), self.fiber_dim)));
        }
        if !self.group.contains(g) {
            return Err(Error::InvalidInput(format!("element {g:?} is not in the group {}", self.group)));
        }
        let slot = &mut self.entries[row * self.source_rank + col];
        match slot.get_mut(&g) {
            Some(b) => *b += block,
            None => {
                slot.insert(g, block);
            }
        }
        Ok(())
    }

    /// All `(row, col, g, block)` terms.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Elem, &CMat)> {
        let m = self.source_rank;
        self.entries.iter().enumerate().flat_map(move |(idx, c)| c.iter().map(move |(g, b)| (idx / m, idx % m, *g, b)))
    }

    /// Largest coefficient magnitude.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms().fold(0.0, |acc, (_, _, _, b)| acc.max(max_abs(b)))
    }

    /// Drops blocks whose entries are all below `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        for c in &mut self.entries {
            c.retain(|_, b| max_abs(b) > tol);
        }
        self
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::InvalidInput(format!("group mismatch: {} vs {}", self.group, other.group)));
        }
        if self.fiber_dim != other.fiber_dim {
            return Err(Error::InvalidInput(format!("fiber dimension mismatch: {} vs {}", self.fiber_dim, other.fiber_dim)));
        }
        Ok(())
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        if self.source_rank != rhs.target_rank {
            return Err(Error::InvalidInput(format!(
                "cannot compose: source rank {} vs target rank {}",
                self.source_rank, rhs.target_rank
            )));
        }
        let mut out = Self::zero(self.group.clone(), self.target_rank, rhs.source_rank, self.fiber_dim);
        for i in 0..self.target_rank {
            for k in 0..self.source_rank {
                let a = self.entry(i, k);
                if a.is_empty() {
                    continue;
                }
                for j in 0..rhs.source_rank {
                    for (g, ba) in a {
                        for (h, bb) in rhs.entry(k, j) {
                            out.add_term(i, j, self.group.mul(*g, *h), ba * bb)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        if (self.target_rank, self.source_rank) != (rhs.target_rank, rhs.source_rank) {
            return Err(Error::InvalidInput("cannot add operators of different shapes".into()));
        }
        let mut out = self.clone();
        for (i, j, g, b) in rhs.terms() {
            out.add_term(i, j, g, b.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(c64(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in &mut out.entries {
            for b in c.values_mut() {
                *b *= s;
            }
        }
        out
    }

    /// The Hilbert-space adjoint: transpose, invert group elements, conjugate blocks.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.group.clone(), self.source_rank, self.target_rank, self.fiber_dim);
        for (i, j, g, b) in self.terms() {
            out.add_term(j, i, self.group.inv(g), b.adjoint()).expect("adjoint stays in range");
        }
        out
    }

    /// Relabels group elements through `embed` into a larger group.
    pub fn embed(&self, group: GroupSpec, embed: impl Fn(Elem) -> Elem) -> Result<Self> {
        let mut out = Self::zero(group, self.target_rank, self.source_rank, self.fiber_dim);
        for (i, j, g, b) in self.terms() {
            out.add_term(i, j, embed(g), b.clone())?;
        }
        Ok(out)
    }

    /// Regular-representation / Fourier realization.
    pub fn realize(&self) -> Realization {
        let n = self.group.order();
        let d = self.fiber_dim;
        let rows = self.target_rank * d * n;
        let cols = self.source_rank * d * n;
        let mut by_power: BTreeMap<i64, CMat> = BTreeMap::new();
        for (i, j, g, b) in self.terms() {
            let m = by_power.entry(g.power).or_insert_with(|| CMat::zeros(rows, cols));
            for y in 0..n {
                let x = self.group.mul_finite(g.finite, y);
                for a in 0..d {
                    for bb in 0..d {
                        m[((i * d + a) * n + x, (j * d + bb) * n + y)] += b[(a, bb)];
                    }
                }
            }
        }
        Realization { finite_order: n, rows, cols, coefficients: by_power.into_iter().collect() }
    }

    /// Weight of each fiber matrix in a von Neumann trace, `1/|F|`.
    pub fn fiber_weight(&self) -> f64 {
        1.0 / self.group.order() as f64
    }

    /// Matrices whose joint spectrum (each weighted by [`fiber_weight`](Self::fiber_weight))
    /// is the spectrum of the operator at Bloch angle θ. Cyclic groups split
    /// into one `(m′d) × (md)` matrix per character; table groups yield the
    /// full regular representation.
    pub fn fibers(&self, theta: f64) -> Vec<CMat> {
        let d = self.fiber_dim;
        let (rows, cols) = (self.target_rank * d, self.source_rank * d);
        match self.group.finite_part() {
            FiniteGroup::Cyclic(n) => {
                let n = *n;
                let mut out = vec![CMat::zeros(rows, cols); n];
                for (i, j, g, b) in self.terms() {
                    let base = g.power as f64 * theta;
                    for (k, m) in out.iter_mut().enumerate() {
                        let phase = C64::from_polar(1.0, base + TAU * ((k * g.finite) % n) as f64 / n as f64);
                        let mut v = m.view_mut((i * d, j * d), (d, d));
                        v += b * phase;
                    }
                }
                out
            }
            FiniteGroup::Table { .. } => vec![self.realize().at(theta)],
        }
    }

    /// Smallest and largest ℤ-powers present.
    pub fn power_span(&self) -> (i64, i64) {
        let mut lo = 0;
        let mut hi = 0;
        for (_, _, g, _) in self.terms() {
            lo = lo.min(g.power);
            hi = hi.max(g.power);
        }
        (lo, hi)
    }

    /// Inverse over a finite group, read back from the inverted regular representation.
    pub fn inverse(&self) -> Result<Self> {
        if self.group.has_integers() {
            return Err(Error::Unsupported("exact inverses are only available over finite groups".into()));
        }
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.target_rank, cols: self.source_rank });
        }
        let m = self.realize().matrix().expect("finite group realization");
        let inv = m.try_inverse().ok_or(Error::NotInvertible { degree: 0 })?;
        Self::from_regular(&self.group, self.target_rank, self.source_rank, self.fiber_dim, &inv)
    }

    /// Recovers group-ring coefficients from an equivariant regular-representation matrix
    /// of shape `(rows·d·|F|) × (cols·d·|F|)`.
    pub fn from_regular(group: &GroupSpec, rows: usize, cols: usize, d: usize, m: &CMat) -> Result<Self> {
        let n = group.order();
        let one = group.one().finite;
        let mut out = Self::zero(group.clone(), rows, cols, d);
        for i in 0..rows {
            for j in 0..cols {
                for x in 0..n {
                    // column `one` of λ(g) has its 1 in row g.
                    let block = CMat::from_fn(d, d, |a, b| m[((i * d + a) * n + x, (j * d + b) * n + one)]);
                    if max_abs(&block) > 0.0 {
                        out.add_term(i, j, Elem::g(x), block)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Direct sum `self ⊕ other` (block diagonal).
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out =
            Self::zero(self.group.clone(), self.target_rank + other.target_rank, self.source_rank + other.source_rank, self.fiber_dim);
        for (i, j, g, b) in self.terms() {
            out.add_term(i, j, g, b.clone())?;
        }
        for (i, j, g, b) in other.terms() {
            out.add_term(self.target_rank + i, self.source_rank + j, g, b.clone())?;
        }
        Ok(out)
    }

    /// Copies the terms of `block` into `self` at offset `(row0, col0)`.
    pub fn place(&mut self, row0: usize, col0: usize, block: &Self) -> Result<()> {
        for (i, j, g, b) in block.terms() {
            self.add_term(row0 + i, col0 + j, g, b.clone())?;
        }
        Ok(())
    }
}
