//! Reference matrices used by the documentation, the tests and the CLI.
//!
//! Columns are given with rows in argument order `s1, s2, s3`.

use crate::model::{AugmentedMatrix, IntColumn};

/// Generator columns of the 3×4 worked example.
pub const TRIPLE_COLUMNS: [[i64; 3]; 4] = [[1, 2, 3], [2, 1, 2], [1, 3, 3], [1, 4, 2]];

/// Generator columns of the 3×11 example with collinear columns.
pub const COLLINEAR_COLUMNS: [[i64; 3]; 11] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [0, 1, 1],
    [0, 1, 1],
    [0, 1, 2],
    [1, 1, 1],
    [1, 1, 2],
    [1, 2, 2],
    [1, 2, 3],
];

fn columns(cols: &[[i64; 3]]) -> Vec<IntColumn> {
    cols.iter().map(|c| IntColumn::from_i64(c)).collect()
}

/// The 3×4 example in its natural row order.
pub fn triple() -> AugmentedMatrix {
    AugmentedMatrix::from_columns(columns(&TRIPLE_COLUMNS)).expect("valid fixture")
}

/// The 3×4 example with its first two rows swapped.
pub fn triple_swapped() -> AugmentedMatrix {
    AugmentedMatrix::with_row_order(columns(&TRIPLE_COLUMNS), &[1, 0, 2]).expect("valid fixture")
}

/// The collinear example, with rows ordered `s3, s2, s1` so that `s1` is
/// eliminated first.
pub fn collinear() -> AugmentedMatrix {
    AugmentedMatrix::with_row_order(columns(&COLLINEAR_COLUMNS), &[2, 1, 0]).expect("valid fixture")
}

/// Plain `BigInt` columns of a fixture, in argument row order.
pub fn raw_columns(cols: &[[i64; 3]]) -> Vec<Vec<num_bigint::BigInt>> {
    cols.iter().map(|c| c.iter().map(|&v| v.into()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn collinear_fixture_rows_are_reversed() {
        let c = collinear();
        let top: Vec<BigInt> = c.row(0);
        let expect: Vec<BigInt> = [0, 0, 1, 1, 1, 1, 2, 1, 2, 2, 3].iter().map(|&v| v.into()).collect();
        assert_eq!(top, expect);
        assert_eq!(c.symbolic()[0].coeff(2), BigInt::from(1));
        let last: Vec<BigInt> = c.row(2);
        let expect: Vec<BigInt> = [1, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1].iter().map(|&v| v.into()).collect();
        assert_eq!(last, expect);
    }

    #[test]
    fn swapped_fixture_keeps_symbols() {
        let b = triple_swapped();
        assert_eq!(b.symbolic()[0].coeff(1), BigInt::from(1));
        assert_eq!(b.row(0), triple().row(1));
    }
}
