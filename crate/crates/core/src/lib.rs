//! Spectral asymptotics for Krein strings carrying self-similar Cantor-type
//! weights, and the small-ball rates they imply for the associated Gaussian
//! processes.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measure;
pub mod quadrature;
pub mod renorm;
pub mod small_ball;
pub mod string_solver;

pub use error::{Error, Result};
pub use measure::{discretize, AtomicMeasure, CellAddress, LadderSpec, Placement};
pub use string_solver::{BoundaryConditions, Spectrum, StringProblem};
