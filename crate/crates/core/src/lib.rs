//! C¹ cubic Hermite finite elements for a one-dimensional elliptic
//! distributed optimal control problem with a pointwise bound on the
//! derivative of the state.
//!
//! The state equation is eliminated, leaving a fourth-order variational
//! inequality over `H²(-1, 1) ∩ H¹₀(-1, 1)`. Its discretization is a strictly
//! convex quadratic program with upper bounds on the nodal slopes, solved
//! exactly by a primal–dual active set method.

pub mod analysis;
pub mod assembly;
pub mod banded;
pub mod cli;
pub mod error;
pub mod hermite;
pub mod mesh;
pub mod problems;
pub mod qp;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use hermite::{hermite_interpolant, reference_shape, DiscreteSolution};
pub use mesh::{DofMap, Mesh};
pub use problems::{paper_example, ProblemSpec, ScalarFn};
pub use quadrature::{gauss_rule, QuadRule};
pub use solver::{solve, SolverOptions};
