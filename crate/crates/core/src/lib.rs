//! Unsteady, nonlinear ship-wave interaction in potential flow: an
//! iso-parametric collocation boundary element method for the Laplace
//! problem, SUPG-stabilized semi-Lagrangian free-surface evolution,
//! Laplace-Beltrami mesh smoothing, a variable-order BDF integrator for the
//! coupled differential-algebraic system, and Kelly-estimator driven
//! adaptive quadrilateral surface meshes.
//!
//! All numerics are generic over the scalar type (see [`scalar::Float`]);
//! the aliases below fix `f64`, which the shipped binaries use.

pub mod bem;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod scalar;
pub mod threads;

pub use error::{Error, Result};
pub use scalar::Float;

/// Default scalar type of the shipped simulator.
pub type Real = f64;
/// 3D vector over the default scalar.
pub type Vec3 = nalgebra::Vector3<Real>;
/// Surface mesh over the default scalar.
pub type Mesh = mesh::ReferenceMesh<Real>;
/// Node positions over the default scalar.
pub type Configuration = mesh::CurrentConfiguration<Real>;
/// Assembled BEM system over the default scalar.
pub type Bem = bem::BemSystem<Real>;
