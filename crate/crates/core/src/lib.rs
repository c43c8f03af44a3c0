//! Numerical laboratory for best meromorphic (AAK) and multipoint rational
//! approximation of functions with branch points or isolated singularities
//! inside the unit disk, together with the Green potential theory needed to
//! predict their pole distributions and error rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximant;
pub mod catalog;
pub mod cut;
pub mod diagnostics;
pub mod doc;
pub mod error;
pub mod hankel;
pub mod num;
pub mod par;
pub mod potential;
pub mod rational;

pub use error::{LabError, Result};
