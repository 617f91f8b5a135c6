//! Shallow water moment models in one space dimension: Legendre moment
//! basis, model fluxes and eigenstructure, smooth steady states, and
//! well-balanced path-conservative finite-volume schemes.

// `!(x > y)` comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod scheme;
pub mod steady;
pub mod timeint;

pub use error::{Error, Result};
pub use models::{Model, ModelKind, StateVector};
