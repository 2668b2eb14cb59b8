//! Cubic microlattice scaffolds in nematic liquid crystals: Q-tensor algebra,
//! scaffold geometry, Landau–de Gennes energies with scaled surface anchoring,
//! homogenised densities, voxel-grid minimization and ε-sweep convergence studies.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod error;
pub mod field;
pub mod harness;
pub mod homogenize;
pub mod qtensor;
pub mod quadrature;
pub mod scaffold;

pub use error::{Error, Result};
pub use qtensor::{QTensor, UniaxialSpec, Vec3};
