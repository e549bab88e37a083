//! Adaptive composite midpoint quadrature over the circle `[0, 2π)`.
//!
//! Each cell carries the midpoint sums at one and two points, combined by one
//! Richardson step. A cell is bisected when that value disagrees with the sum
//! over its halves, which concentrates nodes at the integrable logarithmic
//! singularities produced by rank drops. The whole pass is repeated at a
//! sixteen times tighter local tolerance and the two results are compared.

use std::f64::consts::TAU;

use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub base_cells: usize,
    pub max_depth: u32,
    pub local_tol: f64,
    pub rel_convergence: f64,
    /// Abort once the running mean drops below this value.
    pub divergence_floor: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            base_cells: 64,
            max_depth: 44,
            local_tol: tol::QUAD_LOCAL_TOL,
            rel_convergence: tol::QUAD_REL_CONVERGENCE,
            divergence_floor: f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// `(1/2π) ∫ f dθ`.
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub diverged: bool,
}

/// Cells whose contribution, or whose disagreement between levels, is below
/// this fraction of the tolerance are accepted. Near zeros of a fiber the
/// integrand carries rounding noise that refinement cannot remove.
const NEGLIGIBLE: f64 = 1e-3;

/// Cells narrower than this many ulps of their position are not split further.
const RESOLUTION: f64 = 256.0 * f64::EPSILON;

struct Pass<'a, F> {
    f: &'a mut F,
    cfg: &'a QuadConfig,
    tol: f64,
    evals: usize,
    sum: f64,
    diverged: bool,
}

/// Midpoint rule on a cell of width `w` with one extrapolation step:
/// `(4·M₂ − M₁)/3` from the one- and two-point midpoint sums.
fn extrapolated(mid: f64, q1: f64, q3: f64, w: f64) -> f64 {
    (2.0 * (q1 + q3) - mid) * w / 3.0
}

impl<F: FnMut(f64) -> f64> Pass<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            self.diverged = true;
            return 0.0;
        }
        v
    }

    /// `mid`, `q1`, `q3` are the values at the centre and quarter points of `[a, a + w]`.
    fn cell(&mut self, a: f64, w: f64, mid: f64, q1: f64, q3: f64, depth: u32) -> f64 {
        if self.diverged {
            return 0.0;
        }
        let l1 = self.eval(a + 0.125 * w);
        let l3 = self.eval(a + 0.375 * w);
        let r1 = self.eval(a + 0.625 * w);
        let r3 = self.eval(a + 0.875 * w);
        let coarse = extrapolated(mid, q1, q3, w);
        let fine = extrapolated(q1, l1, l3, 0.5 * w) + extrapolated(q3, r1, r3, 0.5 * w);
        let diff = (fine - coarse).abs();
        let negligible = (fine.abs() + coarse.abs()).min(diff) <= NEGLIGIBLE * self.tol;
        let unresolvable = w <= RESOLUTION * (a.abs() + w).max(1.0);
        if depth >= self.cfg.max_depth || negligible || unresolvable || diff <= self.tol * w / TAU {
            let accepted = fine + (fine - coarse) / 15.0;
            self.sum += accepted;
            if self.sum / TAU < self.cfg.divergence_floor {
                self.diverged = true;
            }
            return accepted;
        }
        let left = self.cell(a, 0.5 * w, q1, l1, l3, depth + 1);
        let right = self.cell(a + 0.5 * w, 0.5 * w, q3, r1, r3, depth + 1);
        left + right
    }

    fn run(&mut self) -> f64 {
        let n = self.cfg.base_cells.max(1);
        let w = TAU / n as f64;
        let mut total = 0.0;
        for j in 0..n {
            let a = j as f64 * w;
            let mid = self.eval(a + 0.5 * w);
            let q1 = self.eval(a + 0.25 * w);
            let q3 = self.eval(a + 0.75 * w);
            total += self.cell(a, w, mid, q1, q3, 0);
            if self.diverged {
                break;
            }
        }
        total / TAU
    }
}

/// Mean value of `f` over the circle.
pub fn circle_mean<F: FnMut(f64) -> f64>(mut f: F, cfg: &QuadConfig) -> QuadResult {
    let run = |tol: f64, f: &mut F| {
        let mut pass = Pass { f, cfg, tol, evals: 0, sum: 0.0, diverged: false };
        let v = pass.run();
        (v, pass.evals, pass.diverged)
    };
    let (coarse, e1, d1) = run(cfg.local_tol * 16.0, &mut f);
    if d1 {
        return QuadResult { value: f64::NEG_INFINITY, error_estimate: f64::INFINITY, evaluations: e1, converged: false, diverged: true };
    }
    let (fine, e2, d2) = run(cfg.local_tol, &mut f);
    let err = (fine - coarse).abs();
    QuadResult {
        value: if d2 { f64::NEG_INFINITY } else { fine },
        error_estimate: err,
        evaluations: e1 + e2,
        converged: !d2 && err <= cfg.rel_convergence * fine.abs().max(1.0),
        diverged: d2,
    }
}

/// `n` equally spaced nodes `θ_j = offset + 2πj/n`.
pub fn uniform_nodes(n: usize, offset: f64) -> impl Iterator<Item = f64> {
    let h = TAU / n as f64;
    (0..n).map(move |j| offset + j as f64 * h)
}
