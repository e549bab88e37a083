//! Relative torsion and numeric checks of the identities it satisfies.
//!
//! Every check evaluates both sides along independent paths and records the
//! residual. Identities whose hypotheses fail on the given input (for
//! instance a non-unimodular metric, whose correction term is not evaluated)
//! are reported as out of scope rather than as numbers.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::analytic_1d::{
    circle_morse_system, circle_torsion, interval_morse_system, metric_torsion_of, theta_1d, torsion_report, Base, FiberMetric, OneDSystem,
};
use crate::error::{Error, Result};
use crate::gen::{self, GenConfig, SeededRng};
use crate::hilbert_complex::{torsion_compare, HilbertComplex};
use crate::linalg::{c64, hermitian_power, kron, log_det_hpd, CMat};
use crate::morse_smale::{Child, CriticalOrbit, MorseSystem, Representation, SubdivisionScheme};
use crate::schema::OneDSchema;
use crate::tol;
use crate::vn_core::{Elem, GroupSpec};

/// `R = (log T^An − log T^Met) − log T^MS`.
pub fn relative_torsion(log_t_an: f64, log_t_met: f64, log_t_ms: f64) -> f64 {
    (log_t_an - log_t_met) - log_t_ms
}

/// `−(log 2)/4 · χ(∂M) · dim E − ½ ∫θ`.
pub fn main_theorem_rhs(chi_boundary: i64, dim_e: usize, theta_integral: f64) -> f64 {
    -LN_2 / 4.0 * chi_boundary as f64 * dim_e as f64 - 0.5 * theta_integral
}

/// Graded objects with an Euler characteristic.
pub trait Graded {
    /// Number of free generators in each degree.
    fn counts(&self) -> Vec<usize>;
    fn fiber_dim(&self) -> usize;
}

impl Graded for HilbertComplex {
    fn counts(&self) -> Vec<usize> {
        self.ranks().to_vec()
    }
    fn fiber_dim(&self) -> usize {
        HilbertComplex::fiber_dim(self)
    }
}

impl Graded for MorseSystem {
    fn counts(&self) -> Vec<usize> {
        self.morse_counts()
    }
    fn fiber_dim(&self) -> usize {
        MorseSystem::fiber_dim(self)
    }
}

/// `(χ(M, E), χ(M)) = (Σ(−1)^k m_k d, Σ(−1)^k m_k)`.
pub fn euler_characteristics<T: Graded>(x: &T) -> (i64, i64) {
    let chi: i64 = x.counts().iter().enumerate().map(|(k, &m)| if k % 2 == 0 { m as i64 } else { -(m as i64) }).sum();
    (chi * x.fiber_dim() as i64, chi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// `R = −(log 2)/4 χ(∂M) dim E − ½∫θ` on the interval.
    BoundaryFormula,
    /// `R = −½∫θ` on the closed circle.
    ClosedFormula,
    /// Torsion of a tensor product against the χ-weighted sum.
    ProductFormula,
    /// The product θ-form vanishes near the boundary for unimodular data.
    ProductVanishing,
    /// `Σ(−1)^ind log det(h₁⁻¹h₂)` against its torsion-level evaluation.
    MetricAnomaly,
    /// Change of `R` under subdivision against `½Σ(−1)^ind ω`.
    Subdivision,
    /// `log T^An = log T^Top` for unimodular bundles with product metrics.
    ProductMetric,
    /// Torsion change under a chain isomorphism.
    TorsionComparison,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::BoundaryFormula,
        TheoremId::ClosedFormula,
        TheoremId::ProductFormula,
        TheoremId::ProductVanishing,
        TheoremId::MetricAnomaly,
        TheoremId::Subdivision,
        TheoremId::ProductMetric,
        TheoremId::TorsionComparison,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::BoundaryFormula => "boundary_formula",
            TheoremId::ClosedFormula => "closed_formula",
            TheoremId::ProductFormula => "product_formula",
            TheoremId::ProductVanishing => "product_vanishing",
            TheoremId::MetricAnomaly => "metric_anomaly",
            TheoremId::Subdivision => "subdivision",
            TheoremId::ProductMetric => "product_metric",
            TheoremId::TorsionComparison => "torsion_comparison",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Exact-combinatorial identities get `1e−8`; those resting on
    /// quadrature or zeta continuation get a looser bound.
    pub fn tolerance(self) -> f64 {
        match self {
            TheoremId::BoundaryFormula => 1e-6,
            TheoremId::ClosedFormula | TheoremId::ProductMetric => 1e-3,
            _ => 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    OutOfScope,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub id: TheoremId,
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// SHA-256 of the canonical JSON of the inputs.
    pub digest: String,
}

fn digest(inputs: &serde_json::Value) -> String {
    Sha256::digest(inputs.to_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl TheoremCheck {
    pub fn new(id: TheoremId, case: impl Into<String>, lhs: f64, rhs: f64, inputs: &serde_json::Value) -> Self {
        let residual = (lhs - rhs).abs();
        let tolerance = id.tolerance();
        let pass = residual < tolerance;
        TheoremCheck {
            id,
            case: case.into(),
            lhs,
            rhs,
            residual,
            tolerance,
            pass,
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            note: None,
            digest: digest(inputs),
        }
    }

    fn unevaluated(id: TheoremId, case: impl Into<String>, outcome: Outcome, note: String, inputs: &serde_json::Value) -> Self {
        TheoremCheck {
            id,
            case: case.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::NAN,
            tolerance: id.tolerance(),
            pass: false,
            outcome,
            note: Some(note),
            digest: digest(inputs),
        }
    }

    pub fn out_of_scope(id: TheoremId, case: impl Into<String>, why: &str, inputs: &serde_json::Value) -> Self {
        Self::unevaluated(id, case, Outcome::OutOfScope, why.to_string(), inputs)
    }

    pub fn error(id: TheoremId, case: impl Into<String>, err: &Error, inputs: &serde_json::Value) -> Self {
        Self::unevaluated(id, case, Outcome::Error, err.to_string(), inputs)
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Selection of identities and inputs for [`run_theorem_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Identities to evaluate; empty means all.
    pub theorems: Vec<TheoremId>,
    pub seed: u64,
    /// Random inputs per randomized identity.
    pub random_cases: usize,
    /// Interval and circle systems for the 1-D identities.
    pub systems: Vec<OneDSchema>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { theorems: Vec::new(), seed: 0, random_cases: 20, systems: default_systems() }
    }
}

impl SuiteConfig {
    /// The boundary formula on the unit interval.
    pub fn interval_example() -> Self {
        SuiteConfig {
            theorems: vec![TheoremId::BoundaryFormula],
            systems: vec![OneDSchema::from_system(&OneDSystem::interval(0.0, 1.0))],
            ..Self::default()
        }
    }

    /// The exact combinatorial identities on seeded random inputs.
    pub fn combinatorial(seed: u64) -> Self {
        SuiteConfig {
            theorems: vec![TheoremId::TorsionComparison, TheoremId::ProductFormula, TheoremId::MetricAnomaly, TheoremId::Subdivision],
            seed,
            ..Self::default()
        }
    }

    fn selected(&self, id: TheoremId) -> bool {
        self.theorems.is_empty() || self.theorems.contains(&id)
    }
}

fn diag(values: &[f64]) -> CMat {
    crate::linalg::real_diag(values)
}

fn scalar(re: f64, im: f64) -> CMat {
    CMat::from_element(1, 1, c64(re, im))
}

/// Intervals with constant and with boundary-product metrics, and circles
/// with unitary, non-unitary and unimodular non-unitary holonomies.
pub fn default_systems() -> Vec<OneDSchema> {
    let e2 = std::f64::consts::E.powi(2);
    let sampled = FiberMetric::Sampled {
        xs: vec![0.0, 0.2, 0.5, 0.8, 1.0],
        values: vec![diag(&[1.0, 2.0]), diag(&[1.0, 2.0]), diag(&[3.0, 1.5]), diag(&[2.0, 0.5]), diag(&[2.0, 0.5])],
    };
    let third = std::f64::consts::FRAC_PI_3;
    let systems = [
        OneDSystem::interval(0.0, 1.0),
        OneDSystem::interval(0.0, e2).with_metric(FiberMetric::Constant(diag(&[1.0, 3.0]))),
        OneDSystem::interval(0.0, 1.0).with_metric(sampled),
        OneDSystem::circle(1.0, scalar(1.0, 0.0)),
        OneDSystem::circle(1.0, scalar(third.cos(), third.sin())),
        OneDSystem::circle(1.0, scalar(-1.0, 0.0)),
        OneDSystem::circle(1.0, scalar(2.0, 0.0)),
        OneDSystem::circle(1.0, diag(&[2.0, 0.5])),
    ];
    systems.iter().map(OneDSchema::from_system).collect()
}

/// Evaluates every selected identity. Checks are ordered by identity, then
/// by case; failures of sub-computations are attached to their check.
pub fn run_theorem_suite(cfg: &SuiteConfig) -> Vec<TheoremCheck> {
    let gen_cfg = GenConfig::default();
    let mut out = Vec::new();
    let systems: Vec<(String, std::result::Result<OneDSystem, Error>, serde_json::Value)> =
        cfg.systems.iter().enumerate().map(|(i, s)| (system_name(i, s), s.build(), serde_json::to_value(s).unwrap_or_default())).collect();
    for id in TheoremId::ALL {
        if !cfg.selected(id) {
            continue;
        }
        let mut rng = gen::seeded(cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(id as u64 + 1)));
        match id {
            TheoremId::TorsionComparison | TheoremId::ProductFormula | TheoremId::MetricAnomaly => {
                for case in 0..cfg.random_cases {
                    let inputs = json!({"seed": cfg.seed, "case": case, "generator": format!("{gen_cfg:?}")});
                    let name = format!("random #{case}");
                    let res = match id {
                        TheoremId::TorsionComparison => check_torsion_comparison(&mut rng, &gen_cfg, &name, &inputs),
                        TheoremId::ProductFormula => check_product_random(&mut rng, &gen_cfg, &name, &inputs),
                        _ => check_metric_anomaly(&mut rng, &gen_cfg, &name, &inputs),
                    };
                    out.push(res.unwrap_or_else(|e| TheoremCheck::error(id, name, &e, &inputs)));
                }
                if id == TheoremId::ProductFormula {
                    let interval = OneDSystem::interval(0.0, 1.0);
                    for (name, sys, inputs) in &systems {
                        let Ok(sys) = sys else { continue };
                        if sys.is_interval() {
                            continue;
                        }
                        let case = format!("unit interval x {name}");
                        out.push(
                            check_product_interval_circle(&interval, sys, &case, inputs)
                                .unwrap_or_else(|e| TheoremCheck::error(id, case, &e, inputs)),
                        );
                    }
                }
            }
            _ => {
                for (name, sys, inputs) in &systems {
                    let sys = match sys {
                        Ok(s) => s,
                        Err(e) => {
                            out.push(TheoremCheck::error(id, name.clone(), e, inputs));
                            continue;
                        }
                    };
                    let res = match id {
                        TheoremId::BoundaryFormula => check_boundary_formula(sys, name, inputs),
                        TheoremId::ClosedFormula => check_closed_formula(sys, name, inputs),
                        TheoremId::ProductVanishing => check_product_vanishing(sys, &systems, name, inputs),
                        TheoremId::Subdivision => check_subdivision(sys, &mut rng, name, inputs),
                        _ => check_product_metric(sys, name, inputs),
                    };
                    match res {
                        Ok(v) => out.extend(v),
                        Err(e) => out.push(TheoremCheck::error(id, name.clone(), &e, inputs)),
                    }
                }
            }
        }
    }
    out
}

fn system_name(i: usize, s: &OneDSchema) -> String {
    match s.base {
        Base::Interval { a, b } => format!("system {i}: interval [{a}, {b}]"),
        Base::Circle { length } => format!("system {i}: circle of length {length}"),
    }
}

fn check_boundary_formula(sys: &OneDSystem, name: &str, inputs: &serde_json::Value) -> Result<Vec<TheoremCheck>> {
    let id = TheoremId::BoundaryFormula;
    if !sys.is_interval() {
        return Ok(Vec::new());
    }
    if !sys.has_constant_metric() {
        return Ok(vec![TheoremCheck::out_of_scope(id, name, "analytic torsion with a varying metric is not computed", inputs)]);
    }
    let r = torsion_report(sys)?;
    let Some(theta) = r.theta_integral else {
        return Ok(vec![TheoremCheck::out_of_scope(id, name, "θ(h) does not vanish; its pullback term is not evaluated", inputs)]);
    };
    let lhs = relative_torsion(r.log_t_an, r.log_t_met, r.log_t_ms);
    let rhs = main_theorem_rhs(r.chi_boundary, sys.fiber_dim, theta);
    Ok(vec![TheoremCheck::new(id, name, lhs, rhs, inputs)])
}

fn check_closed_formula(sys: &OneDSystem, name: &str, inputs: &serde_json::Value) -> Result<Vec<TheoremCheck>> {
    let id = TheoremId::ClosedFormula;
    if sys.is_interval() {
        return Ok(Vec::new());
    }
    let r = torsion_report(sys)?;
    let Some(theta) = r.theta_integral else {
        return Ok(vec![TheoremCheck::out_of_scope(id, name, "θ(h) does not vanish; its pullback term is not evaluated", inputs)]);
    };
    let lhs = relative_torsion(r.log_t_an, r.log_t_met, r.log_t_ms);
    Ok(vec![TheoremCheck::new(id, name, lhs, -0.5 * theta, inputs)])
}

fn check_torsion_comparison(rng: &mut SeededRng, cfg: &GenConfig, name: &str, inputs: &serde_json::Value) -> Result<TheoremCheck> {
    let acyclic = rng.random_bool(0.5);
    let c = gen::random_complex(rng, cfg, acyclic)?;
    let (d, f) = gen::random_chain_isomorphism(rng, &c)?;
    let cmp = torsion_compare(&c, &d, &f)?;
    Ok(TheoremCheck::new(TheoremId::TorsionComparison, name, cmp.lhs, cmp.rhs, inputs))
}

/// `log T(C ⊗ D) = χ(C) log T(D) + χ(D) log T(C)` with `D` acyclic.
fn product_check(c: &HilbertComplex, d: &HilbertComplex, name: &str, inputs: &serde_json::Value) -> Result<TheoremCheck> {
    let lhs = c.tensor_product(d)?.l2_torsion()?;
    let rhs = c.euler_characteristic() as f64 * d.l2_torsion()? + d.euler_characteristic() as f64 * c.l2_torsion()?;
    Ok(TheoremCheck::new(TheoremId::ProductFormula, name, lhs, rhs, inputs))
}

fn check_product_random(rng: &mut SeededRng, cfg: &GenConfig, name: &str, inputs: &serde_json::Value) -> Result<TheoremCheck> {
    let small = GenConfig { max_rank: 2, ..*cfg };
    let c = gen::random_complex(rng, &small, false)?;
    let d = gen::random_complex(rng, &small, true)?;
    product_check(&c, &d, name, inputs)
}

fn check_product_interval_circle(
    interval: &OneDSystem,
    circle: &OneDSystem,
    name: &str,
    inputs: &serde_json::Value,
) -> Result<TheoremCheck> {
    let c = interval_morse_system(interval)?.build_ms_complex()?;
    let d = circle_morse_system(circle)?.build_ms_complex()?;
    product_check(&c, &d, name, inputs)
}

fn check_metric_anomaly(rng: &mut SeededRng, cfg: &GenConfig, name: &str, inputs: &serde_json::Value) -> Result<TheoremCheck> {
    let acyclic = rng.random_bool(0.5);
    let ms = gen::random_morse_system(rng, cfg, acyclic)?;
    let h1 = ms.metrics();
    let h2 = gen::random_orbit_metrics(rng, &ms);
    let lhs = ms.metric_anomaly(&h1, &h2)?;
    let rhs = ms.metric_anomaly_via_torsion(&h1, &h2)?;
    Ok(TheoremCheck::new(TheoremId::MetricAnomaly, name, lhs, rhs, inputs))
}

/// Largest `|θ|` of the product metric `h₁ ⊗ h₂` over the boundary collars of
/// the interval times the circle, where the interval metric is constant.
fn check_product_vanishing(
    sys: &OneDSystem,
    systems: &[(String, std::result::Result<OneDSystem, Error>, serde_json::Value)],
    name: &str,
    inputs: &serde_json::Value,
) -> Result<Vec<TheoremCheck>> {
    let id = TheoremId::ProductVanishing;
    let Base::Interval { a, b } = sys.base else { return Ok(Vec::new()) };
    let (lo, hi) = boundary_collar(sys);
    let product_form = lo > a && hi < b;
    let mut out = Vec::new();
    for (cname, circle, cinputs) in systems {
        let Ok(circle) = circle else { continue };
        let Base::Circle { length } = circle.base else { continue };
        let case = format!("{name} x {cname}");
        let both = json!([inputs, cinputs]);
        let rho = circle.holonomy.clone().unwrap_or_else(|| CMat::identity(circle.fiber_dim, circle.fiber_dim));
        let flat = &rho * rho.adjoint();
        let h2 = |y: f64| hermitian_power(&flat, -y / length);
        let det_flat = log_det_hpd(&flat);
        if !product_form || det_flat.abs() > tol::UNIMODULAR_TOL {
            out.push(TheoremCheck::out_of_scope(
                id,
                case,
                "the interval metric is not a product near the boundary or the circle metric is not unimodular",
                &both,
            ));
            continue;
        }
        let step = 1e-4 * (b - a);
        let log_det = |x: f64, y: f64| log_det_hpd(&kron(&sys.metric_at(x), &h2(y)));
        let mut worst = 0.0f64;
        for (s, e) in [(a, lo), (hi, b)] {
            if e - s <= 2.0 * step {
                continue;
            }
            for i in 0..=16 {
                let x = s + step + (e - s - 2.0 * step) * i as f64 / 16.0;
                for j in 0..16 {
                    let y = length * j as f64 / 16.0;
                    let dx = (log_det(x + step, y) - log_det(x - step, y)) / (2.0 * step);
                    let dy = (log_det(x, y + step) - log_det(x, y - step)) / (2.0 * step);
                    worst = worst.max(dx.abs()).max(dy.abs());
                }
            }
        }
        // The remaining part of the integrand carries the Euler form of the
        // circle as a factor, which vanishes identically.
        out.push(TheoremCheck::new(id, case, worst, 0.0, &both).with_note(format!("collars [{a}, {lo}] and [{hi}, {b}]")));
    }
    Ok(out)
}

/// The largest `[a, lo]` and `[hi, b]` on which the metric is constant.
fn boundary_collar(sys: &OneDSystem) -> (f64, f64) {
    let Base::Interval { a, b } = sys.base else { return (0.0, 0.0) };
    match &sys.metric {
        FiberMetric::Constant(_) => (b, a),
        FiberMetric::Sampled { xs, values } => {
            let same = |i: usize, j: usize| (&values[i] - &values[j]).norm() == 0.0;
            let n = xs.len();
            let lo = (1..n).take_while(|&i| same(i, 0)).last().map_or(a, |i| xs[i]);
            let hi = (0..n - 1).rev().take_while(|&i| same(i, n - 1)).last().map_or(b, |i| xs[i]);
            (lo.max(a), hi.min(b))
        }
    }
}

/// Subdivision schemes on the interval and on the circle. Returns the
/// original system, the scheme and the positions of the two children.
fn subdivision_scheme(sys: &OneDSystem) -> Result<(MorseSystem, SubdivisionScheme, [f64; 2])> {
    let e = Elem::default();
    match sys.base {
        Base::Interval { a, b } => {
            let ms = interval_morse_system(sys)?;
            let l = b - a;
            let scheme = SubdivisionScheme {
                children: vec![
                    Child::new("y", 0, 0, Vec::new(), sys.metric_at(a + 0.875 * l)),
                    Child::new("q", 1, 0, Vec::new(), sys.metric_at(a + 0.75 * l)),
                ],
                incidence: vec![("m".into(), "q".into(), vec![(e, 1)]), ("y".into(), "q".into(), vec![(e, -1)])],
            };
            Ok((ms, scheme, [a + 0.875 * l, a + 0.75 * l]))
        }
        Base::Circle { length } => {
            let ms = circle_morse_system(sys)?;
            let rho = sys.holonomy.clone().expect("validated circle");
            let flat = &rho * rho.adjoint();
            let h = |x: f64| hermitian_power(&flat, -x / length);
            let scheme = SubdivisionScheme {
                children: vec![Child::new("y", 0, 0, Vec::new(), h(0.375 * length)), Child::new("r", 1, 0, Vec::new(), h(0.25 * length))],
                incidence: vec![
                    ("p".into(), "r".into(), vec![(e, 1)]),
                    ("y".into(), "r".into(), vec![(e, -1)]),
                    ("y".into(), "q".into(), vec![(e, 1)]),
                    ("p".into(), "q".into(), vec![(Elem::z(1), -1)]),
                ],
            };
            Ok((ms, scheme, [0.375 * length, 0.25 * length]))
        }
    }
}

/// `R` up to the analytic term, which a subdivision leaves unchanged.
fn relative_without_analytic(sys: &OneDSystem, ms: &MorseSystem) -> Result<f64> {
    let met = if sys.is_interval() { metric_torsion_of(sys, ms)? } else { 0.0 };
    Ok(relative_torsion(0.0, met, ms.ms_torsion()?))
}

fn check_subdivision(sys: &OneDSystem, rng: &mut SeededRng, name: &str, inputs: &serde_json::Value) -> Result<Vec<TheoremCheck>> {
    let id = TheoremId::Subdivision;
    let (ms, scheme, _) = subdivision_scheme(sys)?;
    let r0 = relative_without_analytic(sys, &ms)?;
    let signed = |refined: &MorseSystem, omega: &[f64]| -> f64 {
        refined.orbits.iter().zip(omega).map(|(o, w)| if o.index % 2 == 0 { *w } else { -*w }).sum()
    };
    let mut out = Vec::new();

    let (geo, omega_geo) = ms.subdivide(&scheme)?;
    let lhs = r0 - relative_without_analytic(sys, &geo)?;
    out.push(TheoremCheck::new(id, format!("{name}, bundle metrics"), lhs, 0.5 * signed(&geo, &omega_geo), inputs));

    let unimodular =
        theta_1d(sys)?.unimodular && sys.holonomy.as_ref().map_or(true, |r| r.determinant().norm().ln().abs() < tol::UNIMODULAR_TOL);
    if unimodular {
        let worst = omega_geo.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        out.push(TheoremCheck::new(id, format!("{name}, ω on unimodular data"), worst, 0.0, inputs));
    }

    let mut random = scheme.clone();
    for c in &mut random.children {
        c.metric = gen::random_metric(rng, sys.fiber_dim);
    }
    let (refined, omega) = ms.subdivide(&random)?;
    let lhs = r0 - relative_without_analytic(sys, &refined)?;
    out.push(TheoremCheck::new(id, format!("{name}, random metrics"), lhs, 0.5 * signed(&refined, &omega), inputs));

    let corrected = refined.with_metrics(&ms.transported_metrics(&random)?)?;
    let lhs = r0 - relative_without_analytic(sys, &corrected)?;
    out.push(TheoremCheck::new(id, format!("{name}, corrected metrics"), lhs, 0.0, inputs));
    Ok(out)
}

/// The cellular circle with `cells` vertices and edges and unit metrics.
pub fn cellular_circle(rho: &CMat, cells: usize) -> Result<MorseSystem> {
    let d = rho.nrows();
    let mut ms = MorseSystem::new(GroupSpec::integers(), Representation::holonomy(rho.clone())?);
    let id = CMat::identity(d, d);
    let v: Vec<usize> = (0..cells).map(|i| ms.add_orbit(CriticalOrbit::new(&format!("v{i}"), 0, id.clone()))).collect();
    let e: Vec<usize> = (0..cells).map(|i| ms.add_orbit(CriticalOrbit::new(&format!("e{i}"), 1, id.clone()))).collect();
    for i in 0..cells {
        ms.add_incidence(v[i], e[i], &[(Elem::z(0), 1)]);
        if i + 1 < cells {
            ms.add_incidence(v[i + 1], e[i], &[(Elem::z(0), -1)]);
        } else {
            ms.add_incidence(v[0], e[i], &[(Elem::z(1), -1)]);
        }
    }
    Ok(ms)
}

fn check_product_metric(sys: &OneDSystem, name: &str, inputs: &serde_json::Value) -> Result<Vec<TheoremCheck>> {
    let id = TheoremId::ProductMetric;
    if sys.is_interval() {
        return Ok(Vec::new());
    }
    let rho = sys.holonomy.clone().expect("validated circle");
    if rho.determinant().norm().ln().abs() > tol::UNIMODULAR_TOL {
        return Ok(vec![TheoremCheck::out_of_scope(id, name, "the bundle is not unimodular", inputs)]);
    }
    let an = circle_torsion(sys)?.log_t_an;
    let top = cellular_circle(&rho, 3)?.ms_torsion()?;
    Ok(vec![TheoremCheck::new(id, name, an - top, 0.0, inputs).with_note("topological torsion from three cells")])
}
