//! Algebraically stabilized P1 finite elements for scalar steady
//! convection-diffusion-reaction problems on the unit square.
//!
//! The crate provides structured triangulations (uniform, diagonal-flipped
//! and node-shifted variants), Galerkin assembly, four algebraic
//! stabilizations (AFC with the Kuzmin and BJK limiters, MUAS and SMUAS),
//! a damped fixed-point solver, and the error-norm / DMP / linearity
//! tooling needed for convergence studies.

pub mod analysis;
pub mod assembly;
pub mod fixtures;
mod linsolve;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod runner;
pub mod solver;
pub mod sparse;
pub mod stabilizers;
pub mod vtk;
