//! Symbolic reduction of vector partition functions.
//!
//! A vector partition function `W(s, D)` counts the nonnegative integer
//! solutions of `D·x = s` for a nonnegative integer matrix `D`.  This crate
//! eliminates the rows of `D` one at a time and produces an explicit formula:
//! a signed, guarded sum of scalar partition functions, with nested sums
//! where collinear columns are present.  The formula can be evaluated at any
//! point and checked against a brute-force counter.

pub mod cayley;
pub mod collinear;
pub mod driver;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod scalar;

pub use driver::{reduce, NpPolicy, ReductionConfig};
pub use error::{Error, Result};
pub use eval::{evaluate, oracle_count, verify_grid, Evaluator, GridReport, OracleCounter};
pub use model::{AugmentedMatrix, FormulaNode, IntColumn, LinearForm, ReductionTrace};
pub use scalar::count_scalar;
