//! Numerical toolkit for Lieb-Thirring inequalities on Jacobi matrices and
//! discrete Schrödinger operators.
//!
//! The crate builds finite truncations of the operators, computes their
//! bound states with a Sturm-bisection tridiagonal eigensolver, evaluates
//! both sides of each inequality, checks the supporting lemmas as numeric
//! predicates, and searches for perturbations with extremal ratios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extremal;
pub mod fuzz;
pub mod lattice;
pub mod lemmalab;
pub mod ltcheck;
pub mod operators;
pub mod specfun;
pub mod trieig;

pub use error::{Error, Result};
pub use lattice::{CompactPerturbation, LatticeVector};
pub use ltcheck::{check, SpectralReport, Variant};
pub use operators::TruncationSpec;
pub use specfun::LtConstants;
pub use trieig::SymTridiag;
