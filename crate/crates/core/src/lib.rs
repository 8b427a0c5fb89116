//! Ricci-flat metrics on nilpotent Lie algebras from gradings and
//! filtrations, in exact rational arithmetic.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod batch;
pub mod error;
pub mod exactlin;
pub mod filtration;
pub mod grading;
pub mod metric;
pub mod rational;
pub mod records;

pub use algebra::{hat, parse_algebra, LieAlgebra};
pub use error::{Error, Result};
pub use rational::Rational;
