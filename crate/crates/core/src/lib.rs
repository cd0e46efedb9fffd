//! Light propagation and impurity interactions in three-dimensional
//! subwavelength atomic arrays.
//!
//! Lengths are in units of the resonant wavelength λ0 and frequencies are
//! detunings from the array transition in units of the single-atom decay
//! rate Γ0 (see [`units`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod finite;
pub mod greens;
pub mod impurity;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod units;

pub use error::{Error, Result};
