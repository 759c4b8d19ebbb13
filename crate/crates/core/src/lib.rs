//! Controlled sweeping processes: Moreau–Yosida regularized simulation,
//! adjoint-based optimization and verification of first-order necessary
//! conditions.

pub mod adjoint;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod pmp;

pub use error::{Error, Result};
