//! Linearized Taylor-Hood finite elements for the 3D incompressible
//! Navier-Stokes equations, with a certificate harness that checks the
//! numerical solution against explicit well-posedness thresholds.
//!
//! The pipeline is: [`mesh`] builds a Kuhn tetrahedral mesh of a box,
//! [`fespace`] lays out P2 velocity / P1 pressure dofs, [`assembly`] builds the
//! operators, [`stepper`] advances the semi-implicit scheme, [`norms`] measures
//! the trajectory and [`certify`] turns those measurements into a verdict.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod assembly;
pub mod certify;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod expr;
pub mod fespace;
pub mod mesh;
pub mod norms;
pub mod projection;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod stepper;
pub mod vtk;
pub mod wide;

pub use error::{Error, Result};

/// A point in physical space.
pub type Point = [f64; 3];
