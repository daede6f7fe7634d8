//! Shared domain types: affine forms, augmented matrices, formula trees and
//! reduction traces, plus validation of top-level problems.

mod form;
mod formula;
pub mod json;
mod matrix;
mod trace;

pub use form::{evaluate_linear_form, LinearForm, Rat};
pub use formula::{BoundKind, Congruence, FormulaNode, GuardSet, LoopVar, ScalarGeneratorSet};
pub use matrix::{are_collinear, AugmentedMatrix, IntColumn};
pub(crate) use matrix::check_permutation;
pub use trace::{NumeratorRecord, ReductionTrace, RowDivisor, StepClass, TraceStep};

use crate::error::{Error, Result};
use num_traits::{One, Signed, Zero};

/// Outcome of [`validate_problem`] for an accepted matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub rows: usize,
    pub cols: usize,
    /// Every column has a positive entry, so all solution counts are finite.
    pub definite: bool,
}

/// Checks that a user-supplied matrix is a well-posed partition problem.
///
/// The numeric part must be nonnegative with more columns than rows and no
/// zero column; the symbolic column must hold distinct plain arguments.
pub fn validate_problem(matrix: &AugmentedMatrix) -> Result<ValidationReport> {
    let (l, m) = (matrix.rows(), matrix.cols());
    if l >= m {
        return Err(Error::DimensionMismatch(format!(
            "l < m required (got {l} rows and {m} columns)"
        )));
    }
    let mut seen = vec![false; matrix.symbol_count()];
    for f in matrix.symbolic() {
        let plain = f.constant_term().is_zero()
            && f.is_integral()
            && f.coeffs().iter().filter(|c| !c.is_zero()).count() == 1
            && f.coeffs().last().is_some_and(One::is_one);
        if !plain || std::mem::replace(&mut seen[f.width() - 1], true) {
            return Err(Error::SymbolicColumn(f.to_string()));
        }
    }
    validate_columns(matrix.columns())?;
    Ok(ValidationReport { rows: l, cols: m, definite: true })
}

/// Column checks shared by [`validate_problem`] and the CLI readers.
pub fn validate_columns(columns: &[IntColumn]) -> Result<()> {
    for (i, c) in columns.iter().enumerate() {
        if c.is_zero() {
            return Err(Error::ZeroColumn(i + 1));
        }
        if !c.has_positive_entry() {
            return Err(Error::NonDefinite(i + 1));
        }
        if let Some(v) = c.entries().iter().find(|v| v.is_negative()) {
            return Err(Error::NegativeEntry { column: i + 1, value: v.to_string() });
        }
    }
    Ok(())
}
