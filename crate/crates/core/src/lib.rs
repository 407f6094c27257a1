//! Space-time spectral element SBP-SAT discretization of 1D transient heat
//! conduction with adjoint-based topology optimization of the diffusivity.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod baselines;
pub mod block;
pub mod checks;
pub mod error;
pub mod heat;
pub mod optimizer;
pub mod presets;
pub mod sbp;
pub mod spacetime;
pub mod verification;

pub use error::{Error, Result};
