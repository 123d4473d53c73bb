//! Gradient descent with nonlinear conjugate gradient momentum.
//!
//! The crate covers two problem classes:
//!
//! * smooth quadratics `1/2 x'Ax + x'b`, solved by GD, steepest descent,
//!   heavy-ball momentum, Nesterov acceleration and fixed-step
//!   Fletcher-Reeves gradient descent ([`smooth`]), together with a numerical
//!   check of the fixed-step FR convergence bound;
//! * composite sparse recovery `lambda f(x) + 1/2 ||Ax - b||^2` with
//!   `f = ||.||_1` or `||.||_1 - ||.||_2`, solved by ISTA, FISTA, monotone
//!   APG, proximal steps with conjugate-gradient momentum, and DCA
//!   ([`composite`]).
//!
//! [`problem`] builds seeded test instances, including right-hand sides
//! constructed so that a chosen sparse vector is stationary, and
//! [`diagnostics`] records and emits convergence traces.

pub mod composite;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod momentum;
pub mod problem;
pub mod prox;
pub mod smooth;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Vector};
