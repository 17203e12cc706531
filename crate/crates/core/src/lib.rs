//! Smoothed combined field integral equations for two-dimensional exterior
//! Helmholtz problems.
//!
//! The crate assembles dense Nyström discretizations of the Dirichlet and
//! Neumann combined field integral equations, both in their classical form
//! and in a smoothed form whose integrands are continuously differentiable.
//! The smoothing subtracts from the density its local first-order expansion
//! in terms of two plane-wave combinations `p0`, `p1` that solve the
//! Helmholtz equation exactly, so that Green's identity removes them again
//! from the operator.
//!
//! Module map:
//!
//! - [`specfun`]: `J0`, `J1`, `Y0`, `Y1` and the Hankel functions built on them.
//! - [`geometry`]: parametric boundaries, graded meshes, nearest-point search.
//! - [`smoothing`]: the smoothing functions and the residual densities.
//! - [`kernels`]: parametrized kernels with their logarithmic splittings.
//! - [`quadrature`]: trapezoidal, Martensen–Kussmaul and Kapur–Rokhlin rules.
//! - [`diffmat`]: periodic differentiation matrices on uniform and graded grids.
//! - [`assemble`]: dense system assembly for one or several obstacles.
//! - [`linsolve`]: full GMRES and a dense LU reference solver.
//! - [`fields`]: incident fields, far fields, (smoothed) potentials and grids.

pub mod assemble;
pub mod diffmat;
pub mod fields;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod linsolve;
pub mod quadrature;
pub mod smoothing;
pub mod specfun;

pub use num_complex::Complex64 as C64;

pub use assemble::{assemble, interpolation_weights, DiscreteSystem, Layout, Problem, Scene};
pub use diffmat::DiffOrder;
pub use fields::{far_field, farfield_error, near_grid, potential, BBox, FarField, FieldGrid, IncidentField};
pub use geometry::{CurveJet, GradedMesh, ParametricCurve, Shape, Vec2};
pub use linsolve::{gmres, SolveReport};
pub use quadrature::{Discretization, Method};

/// Errors reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument outside the domain of {function}: {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("target point is not in the exterior domain: ({x}, {y})")]
    NotExterior { x: f64, y: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
