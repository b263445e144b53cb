//! Numerical laboratory for degree-2 L-functions of level-1 Hecke eigenforms.

pub mod acceptance;
pub mod arith;
pub mod cli;
pub mod config;
pub mod error;
pub mod hecke;
pub mod lfunc;
pub mod mollifier;
pub mod moments;
pub mod ntt;
pub mod quad;
pub mod special;
pub mod stats;

pub use error::{LabError, Result};
