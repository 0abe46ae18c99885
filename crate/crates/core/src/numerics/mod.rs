//! Self-contained numerical kernels: Airy functions and zeros, adaptive
//! quadrature, bracketed root finding and a symmetric tridiagonal eigensolver.
//!
//! Everything here is a pure function of its inputs.

mod airy;
mod dd;
mod quadrature;
mod roots;
mod tridiag;

pub use airy::{
    airy_ai, airy_ai_and_derivative, airy_ai_prime, airy_zero_seed, airy_zeros, AiryZeroTable,
    DECAY_CUTOFF, MAX_AIRY_ZEROS, SERIES_LIMIT,
};
pub use quadrature::{integrate, Integral, PanelRule, Quadrature};
pub use roots::{golden_section_minimize, refine_bracketed_root, RootOptions};
pub use tridiag::{solve_tridiagonal_pivoted, tridiag_eigensolve, ComplexTridiagonal, TridiagEigen};
