//! Numerical laboratory for the one-dimensional wave equation
//! `u_tt - u_xx = A|u_t|^p + B|u|^q` with small compactly supported data.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apriori;
pub mod certificate;
pub mod cli;
pub mod data;
pub mod duhamel;
pub mod error;
pub mod free;
pub mod grid;
pub mod io;
pub mod lifespan;
pub mod norms;
pub mod params;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
