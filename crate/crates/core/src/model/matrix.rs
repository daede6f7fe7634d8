use super::form::LinearForm;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One integer column of a generator matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntColumn(#[serde(with = "super::json::vec")] Vec<BigInt>);

impl IntColumn {
    /// # Panics
    /// If `entries` is empty.
    pub fn new(entries: Vec<BigInt>) -> Self {
        assert!(!entries.is_empty(), "columns have at least one entry");
        IntColumn(entries)
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        Self::new(entries.iter().map(|&v| v.into()).collect())
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, row: usize) -> &BigInt {
        &self.0[row]
    }

    /// Entry in the last row.
    pub fn last(&self) -> &BigInt {
        self.0.last().expect("nonempty column")
    }

    /// The column with its last entry dropped (`ĉ`).
    pub fn truncated(&self) -> Vec<BigInt> {
        self.0[..self.0.len() - 1].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// gcd of all entries (0 for the zero column).
    pub fn gcd(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, v| g.gcd(v))
    }

    /// True when the last nonzero entry is positive.
    pub fn is_lex_positive(&self) -> bool {
        self.0.iter().rev().find(|v| !v.is_zero()).is_some_and(|v| v.is_positive())
    }

    pub fn has_positive_entry(&self) -> bool {
        self.0.iter().any(Signed::is_positive)
    }

    pub fn neg(&self) -> Self {
        IntColumn(self.0.iter().map(|v| -v).collect())
    }

    pub fn div_exact(&self, g: &BigInt) -> Self {
        IntColumn(self.0.iter().map(|v| v / g).collect())
    }

    /// Collinearity via vanishing 2×2 minors; see [`are_collinear`].
    pub fn is_collinear_with(&self, other: &IntColumn) -> bool {
        let (a, b) = (&self.0, &other.0);
        // Anchor on one nonzero entry of `a`; all minors vanish iff every
        // minor against the anchor does (for nonzero columns).
        let Some(p) = a.iter().position(|v| !v.is_zero()) else {
            return false;
        };
        if b.iter().all(Zero::is_zero) {
            return false;
        }
        (0..a.len()).all(|j| &a[p] * &b[j] == &a[j] * &b[p])
    }
}

impl fmt::Display for IntColumn {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// True iff every 2×2 minor `a_i b_j − a_j b_i` vanishes.
pub fn are_collinear(a: &IntColumn, b: &IntColumn) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "columns of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_zero() {
        return Err(Error::ZeroColumn(0));
    }
    if b.is_zero() {
        return Err(Error::ZeroColumn(1));
    }
    Ok(a.is_collinear_with(b))
}

/// A symbolic column of affine forms next to `p` integer columns.
///
/// `symbol_count` is the width of the symbol scope the forms live in: the
/// original arguments `s1..sl` followed by any loop variables introduced by
/// convolutions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AugmentedMatrix {
    symbolic: Vec<LinearForm>,
    columns: Vec<IntColumn>,
    symbol_count: usize,
}

impl AugmentedMatrix {
    pub fn new(symbolic: Vec<LinearForm>, columns: Vec<IntColumn>, symbol_count: usize) -> Result<Self> {
        let n = symbolic.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("matrix has no rows".into()));
        }
        if columns.is_empty() {
            return Err(Error::DimensionMismatch("matrix has no numeric columns".into()));
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "column {} has {} entries, expected {n}",
                i + 1,
                c.len()
            )));
        }
        if let Some(f) = symbolic.iter().find(|f| f.width() > symbol_count) {
            return Err(Error::DimensionMismatch(format!(
                "form {f} references symbols beyond the scope of {symbol_count}"
            )));
        }
        Ok(AugmentedMatrix { symbolic, columns, symbol_count })
    }

    /// The top-level matrix `{s, c1, …, cm}` for generator columns of length `l`.
    pub fn from_columns(columns: Vec<IntColumn>) -> Result<Self> {
        let l = columns.first().map_or(0, IntColumn::len);
        let symbolic = (0..l).map(LinearForm::symbol).collect();
        Self::new(symbolic, columns, l)
    }

    /// Like [`from_columns`](Self::from_columns) but with the rows permuted:
    /// row `k` of the result is row `row_order[k]` of the input, and keeps
    /// its original symbol.
    pub fn with_row_order(columns: Vec<IntColumn>, row_order: &[usize]) -> Result<Self> {
        let l = columns.first().map_or(0, IntColumn::len);
        check_permutation(row_order, l)?;
        let symbolic = row_order.iter().map(|&r| LinearForm::symbol(r)).collect();
        let permuted = columns
            .iter()
            .map(|c| {
                if c.len() != l {
                    return Err(Error::DimensionMismatch("ragged columns".into()));
                }
                Ok(IntColumn::new(row_order.iter().map(|&r| c.get(r).clone()).collect()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbolic, permuted, l)
    }

    pub fn rows(&self) -> usize {
        self.symbolic.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn symbolic(&self) -> &[LinearForm] {
        &self.symbolic
    }

    pub fn columns(&self) -> &[IntColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &IntColumn {
        &self.columns[i]
    }

    pub fn symbol_count(&self) -> usize {
        self.symbol_count
    }

    /// Numeric entries of row `r`, left to right.
    pub fn row(&self, r: usize) -> Vec<BigInt> {
        self.columns.iter().map(|c| c.get(r).clone()).collect()
    }

    pub fn into_parts(self) -> (Vec<LinearForm>, Vec<IntColumn>, usize) {
        (self.symbolic, self.columns, self.symbol_count)
    }

    /// The same matrix viewed in a wider symbol scope.
    pub fn with_symbol_count(mut self, symbol_count: usize) -> Self {
        assert!(symbol_count >= self.symbol_count);
        self.symbol_count = symbol_count;
        self
    }
}

impl fmt::Display for AugmentedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for r in 0..self.rows() {
            let nums: Vec<String> = self.columns.iter().map(|c| c.get(r).to_string()).collect();
            writeln!(f, "[{} | {}]", self.symbolic[r], nums.join(", "))?;
        }
        Ok(())
    }
}

pub(crate) fn check_permutation(order: &[usize], l: usize) -> Result<()> {
    if order.len() != l {
        return Err(Error::RowOrder(format!("expected {l} entries, got {}", order.len())));
    }
    let mut seen = vec![false; l];
    for &r in order {
        if r >= l || std::mem::replace(&mut seen[r], true) {
            return Err(Error::RowOrder(format!("{order:?} is not a permutation of 0..{l}")));
        }
    }
    Ok(())
}
