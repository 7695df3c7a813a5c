//! P1 finite elements on a structured triangulation of `(0,1)^2`.

mod assembly;
mod function;
mod mesh;
mod quadrature;
mod solver;
mod sparse;

pub use assembly::{
    assemble_load, assemble_lumped_load, assemble_mass, assemble_plaplace_jacobian,
    assemble_plaplace_residual, assemble_reaction_jacobian, assemble_reaction_residual,
    assemble_stiffness,
};
pub use function::NodalFunction;
pub use mesh::{StructuredMesh, TriangleGeometry};
pub use quadrature::{h1_seminorm_error, integrate, integrate_power, PowerMode, QUADRATURE};
pub use solver::{
    newton_solve, solve_linear, solve_plaplace_dirichlet, NewtonOutcome, ReducedSystem,
    SolverSettings,
};
pub use sparse::{SparseOperator, SparsityPattern};
