//! Structure-preserving integrators for damped and driven multi-symplectic
//! PDEs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod diagnostics;
mod error;
pub mod formulation;
pub mod harness;
pub mod linalg;
pub mod newton;
pub mod schemes;
pub mod specialized;
mod util;

pub use error::{Error, Result};
