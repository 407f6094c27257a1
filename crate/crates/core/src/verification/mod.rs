//! Analytic and manufactured solutions and the convergence and
//! cross-validation studies built on them.

pub mod mms;
pub mod modal;
pub mod studies;
pub mod twodomain;

pub use mms::{flux_compatible_solution, mms_source, ManufacturedSolution};
pub use modal::{modes, ModalReference, ModalSolution, ModalTerm, Mode};
pub use studies::{
    attach_level_changes, be_convergence, crossvalidate_optimum, crossvalidate_point, declared_convergence,
    energy_check, first_level_below, forward_convergence, functional_convergence, heat_sink_problem, loglog_slope,
    reference_optimum, refine_partition, run_level, space_time_integral, spectral_decay, st_l2_error, BeErrorRow,
    ConvergenceRow, CrossValidationRow, EnergyCheck, FunctionalRow, ReferenceOptimum, SolverKind, SpectralDecay,
    SweepLevel,
};
pub use twodomain::{eigen_condition, steady_coefficients, transient_eigenvalue, TwoDomainSolution};
