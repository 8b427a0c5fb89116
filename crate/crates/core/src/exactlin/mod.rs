//! Exact linear algebra over the rationals: kernels, derivations, diagonal
//! tori and Fourier-Motzkin feasibility.

mod derivations;
pub mod fm;
pub mod matrix;

pub use derivations::{derivation_space, diagonal_derivations, is_derivation, DerivationSpace, DiagonalTorus};
pub use fm::{fm_feasible, Certificate, Constraint, ConstraintSystem, Feasibility, Relation};
pub use matrix::{kernel_basis, RationalMatrix};
