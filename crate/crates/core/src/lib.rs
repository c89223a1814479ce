//! Numerical toolkit for completely exceptional (shock-free) relativistic
//! field theories.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ce;
pub mod charsys;
pub mod cli;
pub mod error;
pub mod gravity;
pub mod jets;
pub mod lagrangians;
pub mod linalg;
pub mod rays;
pub mod shock1d;

pub use error::{Error, Result};
