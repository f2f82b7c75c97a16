//! Polynomial regularity estimators: interpolation with calibrated bounds,
//! grids from transverse plaque families, limit polynomials, expansion fits
//! and Holder exponent estimates.

pub mod calibration;
pub mod interp;
pub mod grids;
pub mod journe;
pub mod expansion;
pub mod holder;
