use super::form::LinearForm;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// A multiset of nonzero integers used as scalar-partition denominators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarGeneratorSet(#[serde(with = "super::json::vec")] Vec<BigInt>);

impl ScalarGeneratorSet {
    pub fn new(generators: Vec<BigInt>) -> Result<Self> {
        if generators.iter().any(Zero::is_zero) {
            return Err(Error::ZeroGenerator);
        }
        Ok(ScalarGeneratorSet(generators))
    }

    pub fn from_i64(generators: &[i64]) -> Result<Self> {
        Self::new(generators.iter().map(|&g| g.into()).collect())
    }

    pub fn generators(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(Signed::is_positive)
    }

    /// Entries in ascending order, for order-insensitive comparison.
    pub fn sorted(&self) -> Vec<BigInt> {
        let mut v = self.0.clone();
        v.sort();
        v
    }
}

/// `form ≡ residue (mod modulus)`; false whenever `form` is not an integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Congruence {
    pub form: LinearForm,
    #[serde(with = "super::json")]
    pub modulus: BigInt,
    #[serde(with = "super::json")]
    pub residue: BigInt,
}

impl Congruence {
    /// # Panics
    /// If `modulus < 2`.
    pub fn new(form: LinearForm, modulus: BigInt, residue: BigInt) -> Self {
        assert!(modulus > BigInt::one(), "congruence modulus must be at least 2");
        let residue = residue.mod_floor(&modulus);
        Congruence { form, modulus, residue }
    }
}

/// Sign, Heaviside factors and congruence deltas multiplying a payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GuardSet {
    pub sign: i8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heavisides: Vec<LinearForm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub congruences: Vec<Congruence>,
}

impl Default for GuardSet {
    fn default() -> Self {
        GuardSet { sign: 1, heavisides: Vec::new(), congruences: Vec::new() }
    }
}

impl GuardSet {
    pub fn with_sign(sign: i8) -> Self {
        GuardSet { sign, ..Default::default() }
    }

    pub fn is_trivial(&self) -> bool {
        self.sign == 1 && self.heavisides.is_empty() && self.congruences.is_empty()
    }

    /// Conjunction of two guard sets (signs multiply).
    pub fn merge(&mut self, other: GuardSet) {
        self.sign *= other.sign;
        self.heavisides.extend(other.heavisides);
        self.congruences.extend(other.congruences);
    }

    /// Adds `H(form)` unless it is the constant-true guard or already present.
    pub fn push_heaviside(&mut self, form: LinearForm) {
        if form.is_constant() && !form.constant_term().is_negative() {
            return;
        }
        if !self.heavisides.contains(&form) {
            self.heavisides.push(form);
        }
    }
}

/// Whether a loop's upper bound is the minimum or maximum of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Min,
    Max,
}

/// A summation index running over `0 ..= kind_r ⌊terms[r]⌋`.
///
/// `symbol` is the index of the variable in the symbol scope; bounds may
/// reference the original arguments and loops declared earlier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LoopVar {
    pub symbol: usize,
    pub kind: BoundKind,
    pub bounds: Vec<LinearForm>,
}

/// Expression tree produced by the reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FormulaNode {
    Sum {
        children: Vec<FormulaNode>,
    },
    Product {
        factors: Vec<FormulaNode>,
    },
    Term {
        #[serde(with = "super::json")]
        coeff: BigInt,
        guards: GuardSet,
        payload: Box<FormulaNode>,
    },
    ScalarPartition {
        argument: LinearForm,
        generators: ScalarGeneratorSet,
    },
    Convolution {
        loops: Vec<LoopVar>,
        body: Box<FormulaNode>,
    },
    Binomial {
        top: LinearForm,
        bottom: u32,
    },
    PointDelta {
        pairs: Vec<(LinearForm, LinearForm)>,
    },
    Constant {
        #[serde(with = "super::json")]
        value: BigInt,
    },
}

impl FormulaNode {
    pub fn zero() -> Self {
        FormulaNode::Constant { value: BigInt::zero() }
    }

    pub fn one() -> Self {
        FormulaNode::Constant { value: BigInt::one() }
    }

    pub fn scalar(argument: LinearForm, generators: ScalarGeneratorSet) -> Self {
        FormulaNode::ScalarPartition { argument, generators }
    }

    pub fn term(coeff: BigInt, guards: GuardSet, payload: FormulaNode) -> Self {
        FormulaNode::Term { coeff, guards, payload: Box::new(payload) }
    }

    pub fn guarded(guards: GuardSet, payload: FormulaNode) -> Self {
        Self::term(BigInt::one(), guards, payload)
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(self, FormulaNode::Constant { value } if value.is_zero())
    }

    /// Visits every node, parents before children.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a FormulaNode)) {
        visit(self);
        match self {
            FormulaNode::Sum { children } => children.iter().for_each(|c| c.walk(visit)),
            FormulaNode::Product { factors } => factors.iter().for_each(|c| c.walk(visit)),
            FormulaNode::Term { payload, .. } => payload.walk(visit),
            FormulaNode::Convolution { body, .. } => body.walk(visit),
            _ => {}
        }
    }

    /// All scalar-partition leaves in tree order.
    pub fn scalar_leaves(&self) -> Vec<(&LinearForm, &ScalarGeneratorSet)> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let FormulaNode::ScalarPartition { argument, generators } = n {
                out.push((argument, generators));
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}
