//! Matrix-free approximate generalized Frank-Wolfe solver for composite
//! problems whose smooth part is a logarithmically-homogeneous self-concordant
//! barrier, specialized to the spectrahedron (geometric-mean / ML-QST
//! objectives).
//!
//! The crate is organized around the quantities the method actually touches:
//!
//! * [`linmap`] — the linear map `B`, its adjoint, and the gradient operator
//!   `J = -B*(grad f(B(X)))`, all accessed through matrix-vector products.
//! * [`barrier`] — the barrier calculus in `v = B(X)` coordinates: values,
//!   gaps, Hessian seminorm, the omega functions and the initial-gap bound.
//! * [`eigen`] — randomized Lanczos for the largest eigenpair plus an in-repo
//!   dense symmetric eigensolver used as the exact baseline.
//! * [`oracle`] — inexact / probabilistic linear-minimization oracles and the
//!   condition classifier.
//! * [`solver`] — the Frank-Wolfe loop, delta strategies, stopping logic,
//!   iterate partition diagnostics and the theoretical bound calculators.
//! * [`sampling`] — the O(n+d) Gaussian-sampling iterate representation.
//! * [`instances`] — generators, ground truth and file I/O for problem data.

pub mod barrier;
pub mod eigen;
pub mod error;
pub mod instances;
pub mod linmap;
pub mod mem;
pub mod oracle;
pub mod sampling;
pub mod solver;

pub(crate) mod vecops;

pub use error::{Error, Result};
pub use linmap::{GradientOperator, Instance, MatrixData};
