//! p-adaptive quadrature-free discontinuous Galerkin solver for the 2D
//! shallow-water equations, with a two-lane kernel scheduler.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the tensor sums
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adaptivity;
pub mod basis;
pub mod config;
pub mod dg;
pub mod error;
pub mod executor;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod scenario;
pub mod snapshot;
pub mod time_integration;

pub use error::{Error, Result};
