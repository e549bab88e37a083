//! One-dimensional systems: the interval with absolute boundary conditions
//! and the circle with its ℤ-cover.

mod circle;
mod interval;
pub mod tridiag;
mod witten;

pub use circle::{circle_morse_system, circle_torsion, circle_torsion_with, zeta_log_det_twisted, CircleTorsion};
pub use interval::{
    interval_morse_system, interval_spectrum, metric_torsion_interval, metric_torsion_of, torsion_report, zeta_torsion_interval,
    TorsionReport, ZetaTorsion,
};
pub use witten::{
    deformed_differential, free_term_extract, small_torsion_prediction, witten_discretize, witten_split, witten_sweep,
    DeformedDifferential, FreeTermFit, ScalingFactor, WittenConfig, WittenRow, WittenRun, WittenSplit,
};

use crate::error::{Error, Result};
use crate::linalg::{check_positive_definite, log_det_hpd, CMat};
use crate::tol;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Base {
    Interval { a: f64, b: f64 },
    Circle { length: f64 },
}

/// Hermitian form on the fiber as a function of the base point. Sampled
/// metrics are interpolated linearly between samples, which keeps them
/// positive definite.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberMetric {
    Constant(CMat),
    Sampled { xs: Vec<f64>, values: Vec<CMat> },
}

/// Morse function on the interval.
///
/// `Standard` is `½(x − c)²` around the midpoint `c`, equal to `b − s` at
/// distance `s ≤ ε` from either end, joined by a smooth monotone blend over
/// the next `2ε`. Its only critical point is `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorseFunction {
    Standard { epsilon: f64 },
    Constant { value: f64 },
}

/// A critical point of a Morse function on the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneDSystem {
    pub base: Base,
    pub fiber_dim: usize,
    /// Holonomy around the circle; ignored on the interval.
    pub holonomy: Option<CMat>,
    pub metric: FiberMetric,
    pub morse: MorseFunction,
}

impl OneDSystem {
    /// Trivial line bundle over `[a, b]` with the constant metric and the
    /// standard Morse function with `ε = (b − a)/50`.
    pub fn interval(a: f64, b: f64) -> Self {
        OneDSystem {
            base: Base::Interval { a, b },
            fiber_dim: 1,
            holonomy: None,
            metric: FiberMetric::Constant(CMat::identity(1, 1)),
            morse: MorseFunction::Standard { epsilon: 0.02 * (b - a) },
        }
    }

    /// Flat bundle over the circle of length `length` with the given holonomy.
    pub fn circle(length: f64, holonomy: CMat) -> Self {
        let d = holonomy.nrows();
        OneDSystem {
            base: Base::Circle { length },
            fiber_dim: d,
            holonomy: Some(holonomy),
            metric: FiberMetric::Constant(CMat::identity(d, d)),
            morse: MorseFunction::Constant { value: 0.0 },
        }
    }

    pub fn with_metric(mut self, metric: FiberMetric) -> Self {
        if let FiberMetric::Constant(h) = &metric {
            self.fiber_dim = h.nrows();
        }
        self.metric = metric;
        self
    }

    pub fn with_morse(mut self, morse: MorseFunction) -> Self {
        self.morse = morse;
        self
    }

    pub fn length(&self) -> f64 {
        match self.base {
            Base::Interval { a, b } => b - a,
            Base::Circle { length } => length,
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self.base, Base::Interval { .. })
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        match self.base {
            Base::Interval { a, b } if !(a.is_finite() && b.is_finite() && b > a) => {
                errs.push(format!("interval [{a}, {b}] must have b > a"))
            }
            Base::Circle { length } if !(length.is_finite() && length > 0.0) => {
                errs.push(format!("circle length {length} must be positive"))
            }
            _ => {}
        }
        let d = self.fiber_dim;
        if d == 0 {
            errs.push("fiber dimension must be positive".into());
        }
        if let Base::Circle { .. } = self.base {
            match &self.holonomy {
                None => errs.push("circle system needs a holonomy".into()),
                Some(r) if r.shape() != (d, d) => errs.push(format!("holonomy has shape {:?}, expected {d}×{d}", r.shape())),
                Some(r) if r.clone().try_inverse().is_none() => errs.push("holonomy is not invertible".into()),
                _ => {}
            }
        }
        match &self.metric {
            FiberMetric::Constant(h) => {
                if h.shape() != (d, d) {
                    errs.push(format!("metric has shape {:?}, expected {d}×{d}", h.shape()));
                } else if let Err(e) = check_positive_definite(h, "fiber metric") {
                    errs.push(e.to_string());
                }
            }
            FiberMetric::Sampled { xs, values } => {
                if xs.len() != values.len() || xs.len() < 2 {
                    errs.push("sampled metric needs at least two samples, one per abscissa".into());
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    errs.push("metric sample abscissae must increase".into());
                }
                if let Base::Interval { a, b } = self.base {
                    if let (Some(&x0), Some(&x1)) = (xs.first(), xs.last()) {
                        if (x0 - a).abs() > 1e-12 * (1.0 + a.abs()) || (x1 - b).abs() > 1e-12 * (1.0 + b.abs()) {
                            errs.push(format!("metric samples span [{x0}, {x1}], expected [{a}, {b}]"));
                        }
                    }
                }
                for (x, h) in xs.iter().zip(values) {
                    if h.shape() != (d, d) {
                        errs.push(format!("metric sample at {x} has shape {:?}", h.shape()));
                    } else if let Err(e) = check_positive_definite(h, &format!("metric at x = {x}")) {
                        errs.push(e.to_string());
                    }
                }
            }
        }
        match (self.morse, self.base) {
            (MorseFunction::Standard { epsilon }, Base::Interval { a, b }) if !(epsilon > 0.0 && 3.0 * epsilon < 0.5 * (b - a)) => {
                errs.push(format!("blend width ε = {epsilon} must satisfy 0 < 3ε < (b − a)/2"))
            }
            (MorseFunction::Standard { .. }, Base::Circle { .. }) => {
                errs.push("the standard Morse function is defined on the interval only".into())
            }
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub(crate) fn validated(&self) -> Result<&Self> {
        self.validate().map_err(Error::Validation)?;
        Ok(self)
    }

    /// `h(x)`.
    pub fn metric_at(&self, x: f64) -> CMat {
        match &self.metric {
            FiberMetric::Constant(h) => h.clone(),
            FiberMetric::Sampled { xs, values } => {
                let j = xs.partition_point(|&s| s <= x);
                if j == 0 {
                    return values[0].clone();
                }
                if j == xs.len() {
                    return values[j - 1].clone();
                }
                let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                &values[j - 1] * crate::linalg::c64(1.0 - w, 0.0) + &values[j] * crate::linalg::c64(w, 0.0)
            }
        }
    }

    pub fn has_constant_metric(&self) -> bool {
        match &self.metric {
            FiberMetric::Constant(_) => true,
            FiberMetric::Sampled { values, .. } => values.windows(2).all(|w| (&w[0] - &w[1]).norm() == 0.0),
        }
    }

    /// `∫ h(x) dx` over the interval, exact for the piecewise linear metric.
    pub fn metric_integral(&self) -> CMat {
        match &self.metric {
            FiberMetric::Constant(h) => h * crate::linalg::c64(self.length(), 0.0),
            FiberMetric::Sampled { xs, values } => {
                let d = self.fiber_dim;
                let mut acc = CMat::zeros(d, d);
                for j in 1..xs.len() {
                    acc += (&values[j - 1] + &values[j]) * crate::linalg::c64(0.5 * (xs[j] - xs[j - 1]), 0.0);
                }
                acc
            }
        }
    }

    /// `f(x)`.
    pub fn morse_value(&self, x: f64) -> f64 {
        match (self.morse, self.base) {
            (MorseFunction::Constant { value }, _) => value,
            (MorseFunction::Standard { epsilon }, Base::Interval { a, b }) => standard_morse(a, b, epsilon, x),
            (MorseFunction::Standard { .. }, Base::Circle { .. }) => 0.0,
        }
    }

    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        match (self.morse, self.base) {
            (MorseFunction::Standard { .. }, Base::Interval { a, b }) => {
                vec![CriticalPoint { x: 0.5 * (a + b), index: 0, value: 0.0 }]
            }
            _ => Vec::new(),
        }
    }
}

fn smooth_step(s: f64) -> f64 {
    let psi = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let (p, q) = (psi(s), psi(1.0 - s));
    if p + q == 0.0 {
        0.0
    } else {
        p / (p + q)
    }
}

fn standard_morse(a: f64, b: f64, eps: f64, x: f64) -> f64 {
    let c = 0.5 * (a + b);
    let s = (x - a).min(b - x).max(0.0);
    let quad = 0.5 * (x - c) * (x - c);
    if s <= eps {
        b - s
    } else if s >= 3.0 * eps {
        quad
    } else {
        let w = smooth_step((s - eps) / (2.0 * eps));
        (1.0 - w) * (b - s) + w * quad
    }
}

/// `θ(h) = d/dx log det h(x)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaForm {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub unimodular: bool,
}

impl ThetaForm {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid integral of the sampled form.
    pub fn integral(&self) -> f64 {
        self.xs.windows(2).zip(self.values.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
    }
}

/// Samples `θ(h)` at the metric samples (or on 65 uniform points for a
/// constant metric), by the three-point derivative of `log det h`.
pub fn theta_1d(sys: &OneDSystem) -> Result<ThetaForm> {
    sys.validated()?;
    let xs: Vec<f64> = match &sys.metric {
        FiberMetric::Sampled { xs, .. } => xs.clone(),
        FiberMetric::Constant(_) => {
            let (a, l) = match sys.base {
                Base::Interval { a, b } => (a, b - a),
                Base::Circle { length } => (0.0, length),
            };
            (0..65).map(|i| a + l * i as f64 / 64.0).collect()
        }
    };
    let values = match &sys.metric {
        FiberMetric::Constant(_) => vec![0.0; xs.len()],
        FiberMetric::Sampled { values, .. } => {
            let ld: Vec<f64> = values.iter().map(log_det_hpd).collect();
            three_point_derivative(&xs, &ld)
        }
    };
    let unimodular = values.iter().all(|v| v.abs() < tol::UNIMODULAR_TOL);
    Ok(ThetaForm { xs, values, unimodular })
}

/// Derivative of the quadratic through each point and its neighbours.
fn three_point_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    let quad = |i: usize, at: f64| {
        let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
        let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
        y0 * (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| {
            let centre = i.clamp(1, n - 2);
            quad(centre, x[i])
        })
        .collect()
}
