//! Design updates by the method of moving asymptotes, a scalar reference
//! minimizer and the optimization loop.

mod driver;
mod mma;
mod scalar;

pub(crate) use driver::Stopwatch;
pub use driver::{
    max_abs_diff, relative_change, run_topology_optimization, DesignProblem, IterationRecord, OptimizationTrace,
    SpaceTimeProblem, StopReason, Tolerances, J_REL_EPS,
};
pub use mma::{mma_update, MmaConfig, MmaState};
pub use scalar::{scalar_minimize, ScalarMinimum};
