//! Conditional tail-index estimation with moving-window weighted log-spacings.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod selection;
pub mod simulate;
pub mod special;
pub mod weights;
pub mod window;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
