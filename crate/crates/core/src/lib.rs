//! Rotationally invariant constant-mean-curvature spheres in the warped
//! product `H ×_f R` over the hyperbolic plane, together with numerical
//! verifiers for the identities and inequalities they satisfy.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimates;
pub mod profile;
pub mod quadrature;
pub mod roots;
pub mod surface;
pub mod warp;

pub use error::{Error, Result};
pub use warp::{MetricCoeffs, WarpField};
