use super::form::LinearForm;
use super::formula::Congruence;
use super::matrix::AugmentedMatrix;
use crate::collinear::CollinearGroup;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::fmt;

/// How a column (or group of columns) was handled by an elimination step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepClass {
    P,
    NP,
    Z,
    ZeroTail,
    CollinearGroup,
}

impl fmt::Display for StepClass {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            StepClass::P => "P",
            StepClass::NP => "NP",
            StepClass::Z => "Z",
            StepClass::ZeroTail => "ZeroTail",
            StepClass::CollinearGroup => "CollinearGroup",
        };
        f.write_str(s)
    }
}

/// A row of a reduced matrix that was divided by its gcd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDivisor {
    pub row: usize,
    #[serde(with = "super::json")]
    pub divisor: BigInt,
}

/// Size check of an expanded numerator: `mass` must equal `modulus^factors`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumeratorRecord {
    #[serde(with = "super::json")]
    pub modulus: BigInt,
    pub factors: usize,
    #[serde(with = "super::json")]
    pub mass: BigInt,
    pub entries: usize,
}

/// One recorded reduction step.
///
/// `path` identifies the branch: each elimination appends the index of the
/// eliminated column (0-based, in the parent matrix), and expanded
/// contributions additionally append the residue class `j_l` they cover.
/// `depth` counts the row eliminations above and including this step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub path: Vec<usize>,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub class: StepClass,
    pub sign: i8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heavisides: Vec<LinearForm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub congruences: Vec<Congruence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub row_divisors: Vec<RowDivisor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<AugmentedMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<CollinearGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<NumeratorRecord>,
}

impl TraceStep {
    pub fn new(path: Vec<usize>, depth: usize, column: Option<usize>, class: StepClass) -> Self {
        TraceStep {
            path,
            depth,
            column,
            class,
            sign: 1,
            heavisides: Vec::new(),
            congruences: Vec::new(),
            row_divisors: Vec::new(),
            matrix: None,
            groups: Vec::new(),
            numerator: None,
        }
    }
}

/// Ordered record of every step taken by a reduction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    /// Steps sorted by branch path; the sort is stable so siblings keep
    /// their insertion order.
    pub fn sorted(mut self) -> Self {
        self.steps.sort_by(|a, b| a.path.cmp(&b.path));
        self
    }

    /// Largest elimination depth reached on any branch.
    pub fn max_depth(&self) -> usize {
        self.steps.iter().map(|s| s.depth).max().unwrap_or(0)
    }
}
