//! Static liquid-crystal modeling for hard spherocylinders.
//!
//! Everything is nondimensionalized with rod length `L = 1` and `k_B T = 1`
//! unless a function takes explicit physical inputs.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bingham;
pub mod error;
pub mod frank;
pub mod geometry_kernel;
pub mod nematic_model;
pub mod quadrature;
pub mod smectic1d;
pub mod tensor_algebra;

pub use error::{Error, Result};
