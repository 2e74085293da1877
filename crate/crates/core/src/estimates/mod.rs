//! Numerical harnesses for the linear and trilinear estimates.

pub mod expsum;
pub mod trilinear;
pub mod l6;
pub mod variation;
