//! Group von Neumann algebra arithmetic over finite groups and over `F × ℤ`.

mod group;
mod operator;
mod spectral;

pub use group::{Elem, FiniteGroup, GroupSpec};
pub use operator::{Coeffs, EquivariantOperator, Realization};
pub use spectral::{
    default_grid, fk_det, fk_det_with, novikov_shubin, spectral_density, spectral_density_with, vn_trace, vn_trace_complex,
    vn_trace_realized, Alpha, FkDet, SpectralConfig, SpectralDensity,
};
pub(crate) use spectral::{generic_ranks, Fibers, PROBE_OFFSET};
