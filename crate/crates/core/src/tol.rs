//! Numerical thresholds shared across modules.

/// Relative singular-value cutoff: `σ ≤ KERNEL_TAU · σ_max` counts as zero.
pub const KERNEL_TAU: f64 = 1e-10;

/// Two successive quadrature refinements must agree to this relative level.
pub const QUAD_REL_CONVERGENCE: f64 = 1e-6;

/// Local absolute tolerance driving adaptive cell refinement.
pub const QUAD_LOCAL_TOL: f64 = 1e-10;

/// A log-integral below `DIVERGENCE_CUTOFF · vn_dim` is reported as divergent.
pub const DIVERGENCE_CUTOFF: f64 = -1e6;

/// Coefficient-level tolerance for `c^{k+1} c^k = 0` and chain-map checks.
pub const COMPLEX_TOL: f64 = 1e-12;

/// Hermitian / positivity checks on realized matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Unimodularity threshold for `max |θ(h)|`.
pub const UNIMODULAR_TOL: f64 = 1e-10;

/// Default spectral guard band around the small/large split at 1.
pub const GUARD_BAND: (f64, f64) = (0.5, 2.0);

/// Free-term fits above this condition number are rejected.
pub const FIT_CONDITION_MAX: f64 = 1e12;

/// Minimum number of samples in the lowest decade for a Novikov–Shubin fit.
pub const NS_MIN_POINTS: usize = 8;

/// Default number of uniform θ-nodes for spectral density sampling on ℤ.
pub const DENSITY_NODES: usize = 1 << 16;
