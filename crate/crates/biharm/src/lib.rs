//! Adaptive C0 interior penalty finite elements for fourth-order elliptic
//! equations with Dirac point loads on polygonal domains.
//!
//! The crate provides conforming triangular meshes with longest-edge
//! bisection, Lagrange P2-P4 elements, assembly of the interior penalty
//! scheme for clamped, Dirichlet, Navier and Neumann boundary conditions,
//! two residual a posteriori error estimators, a solve-estimate-mark-refine
//! loop, corner-singularity exponents, and the convergence-study harness
//! behind the `biharm` command line tool.

pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod basis;
pub mod space;
pub mod problem;
pub mod sparse;
pub mod assembly;
pub mod delta;
pub mod solver;
pub mod exponent;
pub mod estimator;
pub mod norms;
pub mod adapt;
pub mod presets;
pub mod study;

pub use error::{BiharmError, Result};
