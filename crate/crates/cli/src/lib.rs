// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{compare, converge, optimize, verify, Context};
pub use config::{ConfigError, RunConfig};
