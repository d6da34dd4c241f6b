//! Mixed finite-element solver for the Oldroyd model of order one:
//! incompressible flow with an exponentially fading memory term
//! `int_0^t gamma exp(-delta (t - s)) Delta u(s) ds`, discretised by MINI or
//! P2-P0 elements in space and backward Euler with a right-rectangle memory
//! quadrature in time.

pub mod assembly;
pub mod error;
pub mod fem;
pub mod manufactured;
pub mod memory;
pub mod mesh;
pub mod sparse;
pub mod stepper;
pub mod study;

#[cfg(test)]
pub(crate) mod oracle;

pub use error::{Error, Result};
