//! Complex hyperbolic ball geometry, weighted Bergman kernels, Poincare
//! series truncations and the Laplace-method pairing asymptotics of
//! submanifolds.

pub mod config;
pub mod cli;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod laplace;
pub mod poincare;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod submanifold;

pub use error::{Error, Result};
