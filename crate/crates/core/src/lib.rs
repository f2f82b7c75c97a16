//! Numerical laboratory for periodic cycle functionals and the cohomological
//! equation over the linear Anosov skew product on the 2-torus, together with
//! the jet graph transform and polynomial regularity estimators.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod error;
pub mod graph_transform;
pub mod pcf;
pub mod regularity;
pub mod rng;
pub mod skew;
pub mod torus;
pub mod transfer;

pub use error::{Error, Result};
