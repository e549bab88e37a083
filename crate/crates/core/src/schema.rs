//! JSON forms of groups, operators, complexes, Morse systems and 1-D systems.
//!
//! Matrices are row lists whose entries are either real numbers or
//! `[re, im]` pairs. Group elements are integers (a power of `z` over ℤ, an
//! index otherwise), labels, or `{"finite": i, "power": k}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytic_1d::{Base, FiberMetric, MorseFunction, OneDSystem};
use crate::error::{Error, Result};
use crate::hilbert_complex::HilbertComplex;
use crate::linalg::{c64, CMat};
use crate::morse_smale::{CriticalOrbit, MorseSystem, Representation};
use crate::vn_core::{Elem, EquivariantOperator, FiniteGroup, GroupSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

pub type MatrixSpec = Vec<Vec<Scalar>>;

pub fn matrix_from_spec(m: &MatrixSpec) -> Result<CMat> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("matrix rows have different lengths".into()));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| match m[i][j] {
        Scalar::Real(x) => c64(x, 0.0),
        Scalar::Complex([re, im]) => c64(re, im),
    }))
}

pub fn matrix_to_spec(m: &CMat) -> MatrixSpec {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im == 0.0 {
                        Scalar::Real(z.re)
                    } else {
                        Scalar::Complex([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSchema {
    FiniteCyclic {
        order: usize,
        /// Adds a free ℤ factor.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        integers: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Integers,
    FiniteTable {
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        integers: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

impl GroupSchema {
    pub fn build(&self) -> Result<GroupSpec> {
        let (finite, integers, labels) = match self {
            GroupSchema::Integers => return Ok(GroupSpec::integers()),
            GroupSchema::FiniteCyclic { order, integers, labels } => (GroupSpec::cyclic(*order)?, *integers, labels),
            GroupSchema::FiniteTable { table, integers, labels } => (GroupSpec::from_table(table.clone())?, *integers, labels),
        };
        let finite = match labels {
            Some(l) => finite.with_labels(l.clone())?,
            None => finite,
        };
        if integers {
            finite.product(&GroupSpec::integers())
        } else {
            Ok(finite)
        }
    }

    pub fn from_group(g: &GroupSpec) -> Self {
        let integers = g.has_integers();
        let labels = g.labels().map(<[String]>::to_vec);
        match g.finite_part() {
            FiniteGroup::Cyclic(1) if integers => GroupSchema::Integers,
            FiniteGroup::Cyclic(n) => GroupSchema::FiniteCyclic { order: *n, integers, labels },
            FiniteGroup::Table { table, .. } => GroupSchema::FiniteTable { table: table.clone(), integers, labels },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemSpec {
    Index(i64),
    Label(String),
    Full { finite: usize, power: i64 },
}

impl ElemSpec {
    pub fn resolve(&self, group: &GroupSpec) -> Result<Elem> {
        let e = match self {
            ElemSpec::Index(k) if group.has_integers() && group.order() == 1 => Elem::z(*k),
            ElemSpec::Index(k) => {
                let i = usize::try_from(*k).map_err(|_| Error::InvalidInput(format!("negative element index {k}")))?;
                Elem::g(i)
            }
            ElemSpec::Label(l) => group.elem_by_label(l).ok_or_else(|| Error::InvalidInput(format!("unknown group element {l:?}")))?,
            ElemSpec::Full { finite, power } => Elem::new(*finite, *power),
        };
        if !group.contains(e) {
            return Err(Error::InvalidInput(format!("element {self:?} is not in {group}")));
        }
        Ok(e)
    }

    pub fn from_elem(group: &GroupSpec, e: Elem) -> Self {
        match (group.has_integers(), group.order()) {
            (true, 1) => ElemSpec::Index(e.power),
            (true, _) => ElemSpec::Full { finite: e.finite, power: e.power },
            (false, _) => match group.labels() {
                Some(l) => ElemSpec::Label(l[e.finite].clone()),
                None => ElemSpec::Index(e.finite as i64),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSchema {
    pub g: ElemSpec,
    pub block: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySchema {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<TermSchema>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSchema {
    pub group: GroupSchema,
    pub source_rank: usize,
    pub target_rank: usize,
    pub fiber_dim: usize,
    pub entries: Vec<EntrySchema>,
}

impl OperatorSchema {
    pub fn build(&self) -> Result<EquivariantOperator> {
        let group = self.group.build()?;
        build_operator(&group, self.target_rank, self.source_rank, self.fiber_dim, &self.entries)
    }

    pub fn from_operator(op: &EquivariantOperator) -> Self {
        let group = op.group();
        let mut entries: BTreeMap<(usize, usize), Vec<TermSchema>> = BTreeMap::new();
        for (i, j, g, b) in op.terms() {
            entries.entry((i, j)).or_default().push(TermSchema { g: ElemSpec::from_elem(group, g), block: matrix_to_spec(b) });
        }
        OperatorSchema {
            group: GroupSchema::from_group(group),
            source_rank: op.source_rank(),
            target_rank: op.target_rank(),
            fiber_dim: op.fiber_dim(),
            entries: entries.into_iter().map(|((row, col), terms)| EntrySchema { row, col, terms }).collect(),
        }
    }
}

fn build_operator(group: &GroupSpec, target: usize, source: usize, d: usize, entries: &[EntrySchema]) -> Result<EquivariantOperator> {
    let mut op = EquivariantOperator::zero(group.clone(), target, source, d);
    for e in entries {
        if e.row >= target || e.col >= source {
            return Err(Error::InvalidInput(format!("entry ({}, {}) outside a {target}x{source} operator", e.row, e.col)));
        }
        for t in &e.terms {
            op.add_term(e.row, e.col, t.g.resolve(group)?, matrix_from_spec(&t.block)?)?;
        }
    }
    Ok(op)
}

/// A complex: its ranks, one operator per differential and optional metrics.
/// `group` and `fiber_dim` are only needed when there are no differentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSchema {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_dim: Option<usize>,
    pub ranks: Vec<usize>,
    #[serde(default)]
    pub differentials: Vec<OperatorSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<MatrixSpec>>,
}

impl ComplexSchema {
    pub fn build(&self) -> Result<HilbertComplex> {
        let ops = self.differentials.iter().map(OperatorSchema::build).collect::<Result<Vec<_>>>()?;
        let group = match (&self.group, ops.first()) {
            (Some(g), _) => g.build()?,
            (None, Some(op)) => op.group().clone(),
            (None, None) => GroupSpec::trivial(),
        };
        let d = self.fiber_dim.or_else(|| ops.first().map(EquivariantOperator::fiber_dim)).unwrap_or(1);
        let c = HilbertComplex::new(group, d, self.ranks.clone(), ops)?;
        match &self.metrics {
            Some(ms) => c.twist_metric(ms.iter().map(matrix_from_spec).collect::<Result<_>>()?),
            None => Ok(c),
        }
    }

    pub fn from_complex(c: &HilbertComplex) -> Self {
        ComplexSchema {
            group: Some(GroupSchema::from_group(c.group())),
            fiber_dim: Some(c.fiber_dim()),
            ranks: c.ranks().to_vec(),
            differentials: c.differentials().iter().map(OperatorSchema::from_operator).collect(),
            metrics: c.metrics().map(|ms| ms.iter().map(matrix_to_spec).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationSchema {
    /// Images of generators, keyed by element label; `"z"` is the ℤ generator.
    pub generators: BTreeMap<String, MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSchema {
    pub label: String,
    pub index: usize,
    pub metric: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceTerm {
    pub g: ElemSpec,
    pub n: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSchema {
    pub from: String,
    pub to: String,
    pub terms: Vec<IncidenceTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseSchema {
    pub group: GroupSchema,
    pub rep: RepresentationSchema,
    pub orbits: Vec<OrbitSchema>,
    #[serde(default)]
    pub incidence: Vec<IncidenceSchema>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orientations: BTreeMap<String, i8>,
}

impl MorseSchema {
    pub fn build(&self) -> Result<MorseSystem> {
        let group = self.group.build()?;
        let mut z = None;
        let mut finite = Vec::new();
        let mut dim = None;
        for (label, m) in &self.rep.generators {
            let m = matrix_from_spec(m)?;
            dim.get_or_insert(m.nrows());
            if label == "z" && group.has_integers() {
                z = Some(m);
            } else {
                let e = group.elem_by_label(label).ok_or_else(|| Error::InvalidInput(format!("unknown generator {label:?}")))?;
                finite.push((label.clone(), e, m));
            }
        }
        let d = match (dim, self.orbits.first()) {
            (Some(d), _) => d,
            (None, Some(o)) => o.metric.len(),
            (None, None) => 1,
        };
        let rep = if finite.is_empty() && z.is_none() {
            Representation::trivial(&group, d)
        } else {
            Representation::from_generators(&group, d, &finite, z)?
        };
        let mut ms = MorseSystem::new(group.clone(), rep);
        for o in &self.orbits {
            let mut orbit = CriticalOrbit::new(&o.label, o.index, matrix_from_spec(&o.metric)?);
            if let Some(&s) = self.orientations.get(&o.label) {
                orbit.orientation = s;
            }
            ms.add_orbit(orbit);
        }
        for inc in &self.incidence {
            let pos = |l: &str| ms.orbit_by_label(l).ok_or_else(|| Error::InvalidInput(format!("unknown orbit {l:?}")));
            let (from, to) = (pos(&inc.from)?, pos(&inc.to)?);
            let terms = inc.terms.iter().map(|t| Ok((t.g.resolve(&group)?, t.n))).collect::<Result<Vec<_>>>()?;
            ms.add_incidence(from, to, &terms);
        }
        Ok(ms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSchema {
    Constant { value: MatrixSpec },
    Sampled { xs: Vec<f64>, values: Vec<MatrixSpec> },
}

/// A 1-D system. Omitted fields default to the trivial line bundle, the
/// constant metric and, on the interval, the standard Morse function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneDSchema {
    pub base: Base,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holonomy: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morse: Option<MorseFunction>,
}

impl OneDSchema {
    pub fn build(&self) -> Result<OneDSystem> {
        let mut sys = match self.base {
            Base::Interval { a, b } => OneDSystem::interval(a, b),
            Base::Circle { length } => {
                let rho = match &self.holonomy {
                    Some(h) => matrix_from_spec(h)?,
                    None => CMat::identity(self.fiber_dim.unwrap_or(1), self.fiber_dim.unwrap_or(1)),
                };
                OneDSystem::circle(length, rho)
            }
        };
        if let Some(d) = self.fiber_dim {
            sys.fiber_dim = d;
            sys.metric = FiberMetric::Constant(CMat::identity(d, d));
        }
        match &self.metric {
            Some(MetricSchema::Constant { value }) => sys = sys.with_metric(FiberMetric::Constant(matrix_from_spec(value)?)),
            Some(MetricSchema::Sampled { xs, values }) => {
                let values = values.iter().map(matrix_from_spec).collect::<Result<Vec<_>>>()?;
                if let Some(v) = values.first() {
                    sys.fiber_dim = v.nrows();
                }
                sys = sys.with_metric(FiberMetric::Sampled { xs: xs.clone(), values });
            }
            None => {}
        }
        if let Some(m) = self.morse {
            sys = sys.with_morse(m);
        }
        sys.validate().map_err(Error::Validation)?;
        Ok(sys)
    }

    pub fn from_system(sys: &OneDSystem) -> Self {
        let metric = match &sys.metric {
            FiberMetric::Constant(h) => MetricSchema::Constant { value: matrix_to_spec(h) },
            FiberMetric::Sampled { xs, values } => {
                MetricSchema::Sampled { xs: xs.clone(), values: values.iter().map(matrix_to_spec).collect() }
            }
        };
        OneDSchema {
            base: sys.base,
            fiber_dim: Some(sys.fiber_dim),
            holonomy: sys.holonomy.as_ref().map(matrix_to_spec),
            metric: Some(metric),
            morse: Some(sys.morse),
        }
    }
}
