//! Exact computations around Tanaka prolongation: graded nilpotent Lie
//! algebras, their prolongations and reductions, flat models, derived flags
//! of distributions and symmetries of graded coordinate models.

pub mod distribution;
pub mod flat;
pub mod error;
pub mod graded;
pub mod linalg;
pub mod poly;
pub mod prolong;
pub mod symmetry;

pub use error::{Error, Result};
