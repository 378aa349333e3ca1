//! Pseudospectral solver toolkit for the cubic nonlinear Schrödinger equation
//! `i u_t = -u_xx + |u|^2 u` on the torus `[-pi, pi)`.

// Negated comparisons are used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bourgain;
pub mod error;
mod fft;
pub mod harness;
pub mod initial_data;
pub mod integrators;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
