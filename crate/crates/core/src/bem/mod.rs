//! Collocation boundary element method for the mixed Laplace problem on the
//! current surface configuration.

pub mod assembly;
pub mod kernel;
pub mod quadrature;
pub mod solve;

pub use assembly::{assemble_system, compute_alpha_rbm, BemSystem};
pub use kernel::{green_function, green_normal_gradient};
pub use quadrature::QuadratureRule;
pub use solve::{
    bie_residual, evaluate_interior_potential, resolve_duplicates, solve_mixed_bvp, BcKind,
    DuplicateResolution, MixedBcAssignment, MixedSolve,
};
