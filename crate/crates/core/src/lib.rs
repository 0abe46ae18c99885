//! Quantum dynamics under continuous energy measurement.
//!
//! The crate evolves density matrices (nonselective measurement) and
//! restricted wavefunctions (selective measurement, for a registered energy)
//! of the harmonic oscillator and the gravitational quantum bouncer, in
//! closed form in the energy basis. [`oracle`] holds independent grid-based
//! integrators used to cross-check the closed forms, and [`estimates`] the
//! closed-form phenomenology for dropped atomic clouds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod states;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/energy-basis.md")]
    mod energy_basis {}
    #[doc = include_str!("../../../book/src/initial-states.md")]
    mod initial_states {}
    #[doc = include_str!("../../../book/src/nonselective.md")]
    mod nonselective {}
    #[doc = include_str!("../../../book/src/selective.md")]
    mod selective {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/estimates.md")]
    mod estimates {}
}
