//! Desk-scale computations of L²-invariants.

pub mod analytic_1d;
pub mod error;
pub mod gen;
pub mod hilbert_complex;
pub mod linalg;
pub mod morse_smale;
pub mod quad;
pub mod relative_anomaly;
pub mod schema;
pub mod tol;
pub mod vn_core;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/determinants.md")]
    mod determinants {}
    #[doc = include_str!("../../../book/src/complexes.md")]
    mod complexes {}
    #[doc = include_str!("../../../book/src/morse.md")]
    mod morse {}
    #[doc = include_str!("../../../book/src/one_dimensional.md")]
    mod one_dimensional {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
}
