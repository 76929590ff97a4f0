//! Covariant phase observables represented by truncated phase matrices,
//! with numerical tests for sharpness, extremality and cleanness, and an
//! exact simulator on finite cyclic groups.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod groupsim;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod optimal;
pub mod phasecore;
pub mod specfun;

pub use error::{Error, Result};
