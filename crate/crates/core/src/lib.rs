//! Decide whether a finitely generated abelian semigroup of affine maps on
//! ℂⁿ has a dense orbit.
//!
//! The pipeline homogenizes the generators into `(n+1)×(n+1)` matrices,
//! conjugates them into block lower-triangular normal form, takes matrix
//! logarithms that land back in the affine maps, and then decides an
//! integer-rank density criterion on the resulting vectors, either exactly
//! (symbolic scalars) or numerically (lattice reduction).

pub mod affine;
pub mod density;
pub mod error;
pub mod exp_log;
pub mod linalg;
pub mod normal_form;
pub mod orbit;
pub mod pipeline;
pub mod problem;
pub mod scalar;

pub use error::{Error, Result};
