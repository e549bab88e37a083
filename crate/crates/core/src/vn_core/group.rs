use std::fmt;

use crate::error::{Error, Result};

/// The finite factor of Γ = F × ℤ^ε.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiniteGroup {
    Cyclic(usize),
    Table { table: Vec<Vec<usize>>, identity: usize, inverse: Vec<usize> },
}

/// A group of the form F or F × ℤ with F finite.
///
/// Finite cyclic groups are handled through their characters; groups given by
/// a multiplication table go through the full regular representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    finite: FiniteGroup,
    integers: bool,
    labels: Option<Vec<String>>,
}

/// A group element: an index into the finite factor and a power of the ℤ generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem {
    pub finite: usize,
    pub power: i64,
}

impl Elem {
    pub const fn new(finite: usize, power: i64) -> Self {
        Elem { finite, power }
    }

    /// `z^k` in ℤ (or in F × ℤ with trivial finite part when F is cyclic).
    pub const fn z(power: i64) -> Self {
        Elem { finite: 0, power }
    }

    /// `g^k` in a cyclic group, or the element with index `k` of a table.
    pub const fn g(index: usize) -> Self {
        Elem { finite: index, power: 0 }
    }
}

impl GroupSpec {
    pub fn trivial() -> Self {
        GroupSpec { finite: FiniteGroup::Cyclic(1), integers: false, labels: None }
    }

    pub fn cyclic(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("group order must be at least 1".into()));
        }
        Ok(GroupSpec { finite: FiniteGroup::Cyclic(order), integers: false, labels: None })
    }

    pub fn integers() -> Self {
        GroupSpec { finite: FiniteGroup::Cyclic(1), integers: true, labels: None }
    }

    /// A finite group from its multiplication table, `table[a][b] = a·b`.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidInput("multiplication table is empty".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!("table row {a} has length {} (expected {n})", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidInput(format!("table entry {bad} out of range in row {a}")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidInput("table has no identity element".into()))?;
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::InvalidInput(format!("element {a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidInput(format!("table is not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(GroupSpec { finite: FiniteGroup::Table { table, identity, inverse }, integers: false, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.order() {
            return Err(Error::InvalidInput(format!("{} labels for a group of order {}", labels.len(), self.order())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Order of the finite factor.
    pub fn order(&self) -> usize {
        match &self.finite {
            FiniteGroup::Cyclic(n) => *n,
            FiniteGroup::Table { table, .. } => table.len(),
        }
    }

    pub fn finite_part(&self) -> &FiniteGroup {
        &self.finite
    }

    pub fn has_integers(&self) -> bool {
        self.integers
    }

    pub fn is_finite(&self) -> bool {
        !self.integers
    }

    pub fn is_trivial(&self) -> bool {
        !self.integers && self.order() == 1
    }

    pub fn one(&self) -> Elem {
        match &self.finite {
            FiniteGroup::Cyclic(_) => Elem::default(),
            FiniteGroup::Table { identity, .. } => Elem::g(*identity),
        }
    }

    pub fn mul_finite(&self, a: usize, b: usize) -> usize {
        match &self.finite {
            FiniteGroup::Cyclic(n) => (a + b) % n,
            FiniteGroup::Table { table, .. } => table[a][b],
        }
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem { finite: self.mul_finite(a.finite, b.finite), power: a.power + b.power }
    }

    pub fn inv(&self, a: Elem) -> Elem {
        let finite = match &self.finite {
            FiniteGroup::Cyclic(n) => (n - a.finite % n) % n,
            FiniteGroup::Table { inverse, .. } => inverse[a.finite],
        };
        Elem { finite, power: -a.power }
    }

    pub fn contains(&self, e: Elem) -> bool {
        e.finite < self.order() && (self.integers || e.power == 0)
    }

    pub fn label(&self, e: Elem) -> String {
        let f = match &self.labels {
            Some(l) => l[e.finite].clone(),
            None => e.finite.to_string(),
        };
        match (self.integers, self.order()) {
            (true, 1) => e.power.to_string(),
            (true, _) => format!("({f},{})", e.power),
            (false, _) => f,
        }
    }

    pub fn elem_by_label(&self, label: &str) -> Option<Elem> {
        let idx = match &self.labels {
            Some(l) => l.iter().position(|x| x == label)?,
            None => label.parse().ok()?,
        };
        (idx < self.order()).then_some(Elem::g(idx))
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Γ₁ × Γ₂; at most one factor may contain ℤ.
    pub fn product(&self, other: &GroupSpec) -> Result<GroupSpec> {
        if self.integers && other.integers {
            return Err(Error::Unsupported("products ℤ × ℤ are out of scope".into()));
        }
        let integers = self.integers || other.integers;
        let finite = match (&self.finite, &other.finite) {
            (FiniteGroup::Cyclic(1), f) | (f, FiniteGroup::Cyclic(1)) => f.clone(),
            _ => {
                let (n1, n2) = (self.order(), other.order());
                let table = (0..n1 * n2)
                    .map(|x| (0..n1 * n2).map(|y| self.mul_finite(x / n2, y / n2) * n2 + other.mul_finite(x % n2, y % n2)).collect())
                    .collect();
                return GroupSpec::from_table(table).map(|mut g| {
                    g.integers = integers;
                    g
                });
            }
        };
        Ok(GroupSpec { finite, integers, labels: None })
    }

    /// Image of `(a, b)` in [`GroupSpec::product`]`(self, other)`.
    pub fn pair(&self, other: &GroupSpec, a: Elem, b: Elem) -> Elem {
        Elem { finite: a.finite * other.order() + b.finite, power: a.power + b.power }
    }

    pub fn kind(&self) -> &'static str {
        match (&self.finite, self.integers) {
            (FiniteGroup::Cyclic(1), true) => "integers",
            (_, true) => "finite_times_integers",
            (FiniteGroup::Cyclic(_), false) => "finite_cyclic",
            (FiniteGroup::Table { .. }, false) => "finite_table",
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fin = match &self.finite {
            FiniteGroup::Cyclic(1) => String::new(),
            FiniteGroup::Cyclic(n) => format!("Z/{n}"),
            FiniteGroup::Table { table, .. } => format!("G{}", table.len()),
        };
        match (fin.is_empty(), self.integers) {
            (true, true) => write!(f, "Z"),
            (true, false) => write!(f, "1"),
            (false, true) => write!(f, "{fin} x Z"),
            (false, false) => write!(f, "{fin}"),
        }
    }
}
