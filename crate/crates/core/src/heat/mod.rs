//! Continuous problem data, material interpolation, SAT coefficients and the
//! assembly of the global space-time system.

mod assembly;
mod problem;
mod sat;

pub use assembly::{assemble_global, element_slices, residual, BlockPart, Discretization, ElementBlocks, GlobalSystem};
pub use problem::{
    dkappa_drho, kappa, uniform_breakpoints, BoundaryCondition, DesignField, Fn1, Fn2, MaterialModel, ProblemSpec,
};
pub use sat::{choose_sat_coefficients, sat_for_problem, SatCoefficients, SatOverrides};
