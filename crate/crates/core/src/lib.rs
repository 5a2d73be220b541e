//! Elliptic-vortex reduction of rotating non-isothermal magnetogasdynamics.
//!
//! The crate integrates the ten-dimensional reduced dynamics, builds the
//! pulsating-rotating exact solutions, and checks the structure that comes
//! with them: conserved quantities, the Ermakov–Ray–Reid system of the
//! ellipse semi-axes, a Lax pair, and the governing field equations
//! themselves at points of the plasma.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cli;
pub mod config;
pub mod dynsys;
pub mod ermakov;
pub mod error;
pub mod exact;
pub mod fields;
pub mod lax;
pub mod model;
pub mod ode;
#[cfg(test)]
mod properties;
pub mod reduced;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
