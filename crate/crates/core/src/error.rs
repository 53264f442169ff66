//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by mesh handling, assembly, solvers, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate panel {panel}: area Jacobian {jacobian} below tolerance {tolerance}")]
    DegeneratePanel {
        panel: usize,
        jacobian: f64,
        tolerance: f64,
    },

    #[error("local coordinates ({u}, {v}) outside the reference square [0,1]^2")]
    OutOfReferenceSquare { u: f64, v: f64 },

    #[error("zero separation: Green kernel evaluated at |r| = 0")]
    ZeroSeparation,

    #[error("node {node} adjacent to {count} regions; more than 3 is not supported")]
    TooManyRegions { node: usize, count: usize },

    #[error("cyclic hanging-node constraint chain involving dof {dof}")]
    CyclicConstraint { dof: usize },

    #[error("singular first fundamental form on panel {panel} at ({u}, {v})")]
    SingularMetric { panel: usize, u: f64, v: f64 },

    #[error("{context}: iterative solver failed to converge ({iterations} iterations, residual {residual})")]
    SolverDiverged {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("duplicate family at node {node} has {count} Dirichlet sides; at most one is supported")]
    MultipleDirichletDuplicates { node: usize, count: usize },

    #[error("waterline normals nearly parallel (angle {angle_deg} deg < 5 deg)")]
    ParallelNormals { angle_deg: f64 },

    #[error("hull projection did not converge within {max_iterations} iterations")]
    ProjectionDiverged { max_iterations: usize },

    #[error("free surface geometry failure: {0}")]
    GeometryFailure(String),

    #[error("Newton iteration exceeded {max_iterations} iterations (residual {residual})")]
    NewtonMaxIterations {
        max_iterations: usize,
        residual: f64,
    },

    #[error("step size {h} fell below the minimum {h_min} at t = {t}")]
    StepUnderflow { h: f64, h_min: f64, t: f64 },

    #[error("insufficient BDF history: order {order} requested with {stored} stored states")]
    InsufficientHistory { order: usize, stored: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint version mismatch: expected {expected}, found {found}")]
    CheckpointVersion { expected: String, found: String },

    #[error("checkpoint corrupt: {0}")]
    CheckpointCorrupt(String),

    #[error("scenario build failure: {0}")]
    ScenarioBuild(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Invalid(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
