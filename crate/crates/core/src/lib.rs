//! Exact desk-scale workbench for large sieve inequalities over sparse moduli.
//!
//! The crate computes additive energies, congruence box counts, Farey-point
//! spacing, large sieve quadratic forms and their optimal constants,
//! exponential sums, and prime error terms in progressions to
//! Piatetski-Shapiro moduli, and compares them with the published exponent
//! bounds.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod audit;
pub mod boxes;
pub mod bv;
pub mod cli;
pub mod bounds;
pub mod dd;
pub mod energy;
mod error;
pub mod expsums;
pub mod moduli;
pub mod sieve;

pub use error::{Error, Result};
