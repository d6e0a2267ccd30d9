//! Projectively invariant Laplacians, their extensions to densities, and
//! the numerical checks that back them up.

pub mod cli;
pub mod error;
pub mod expr;
pub mod geom;
pub mod operators;
pub mod random;
pub mod thomas;
pub mod verify;

pub use error::{Error, Result};
