//! Partitions whose generator matrix has collinear columns.
//!
//! Each maximal group of collinear columns `c_j = u_j·C` is replaced by a
//! summation index `k = Σ u_j x_j`: the group contributes the scalar factor
//! `W(k, u)` and shifts the argument by `k·C`.  What remains is a partition
//! over the noncollinear (competent) residual columns, or a point delta when
//! at most one residual column is left.

use crate::driver::{self, ReductionConfig};
use crate::error::{Error, Result};
use crate::model::{
    AugmentedMatrix, BoundKind, FormulaNode, IntColumn, LinearForm, LoopVar, ReductionTrace,
    ScalarGeneratorSet,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// A maximal set of collinear columns `member_j = multipliers_j · gcd_vector`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CollinearGroup {
    pub gcd_vector: IntColumn,
    #[serde(with = "crate::model::json::vec")]
    pub multipliers: Vec<BigInt>,
    pub member_indices: Vec<usize>,
}

impl CollinearGroup {
    /// Builds the group for the given columns of `matrix`.
    ///
    /// The gcd vector is the elementwise gcd of the members, so the
    /// multipliers are coprime positive integers.
    pub fn from_members(matrix: &AugmentedMatrix, members: Vec<usize>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::ColumnClass {
                column: members.first().copied().unwrap_or(0),
                reason: "a collinear group needs at least two columns".into(),
            });
        }
        let first = matrix.column(members[0]);
        if !first.is_lex_positive() {
            return Err(Error::ColumnClass { column: members[0], reason: "column is not lex-positive".into() });
        }
        let direction = first.div_exact(&first.gcd());
        let pivot = direction.entries().iter().position(|v| !v.is_zero()).expect("nonzero column");
        let mut scales = Vec::with_capacity(members.len());
        for &j in &members {
            let col = matrix.column(j);
            let t = col.get(pivot) / direction.get(pivot);
            if !t.is_positive() || col != &IntColumn::new(direction.entries().iter().map(|v| v * &t).collect()) {
                return Err(Error::ColumnClass {
                    column: j,
                    reason: format!("{col} is not a positive multiple of {direction}"),
                });
            }
            scales.push(t);
        }
        let g = scales.iter().fold(BigInt::zero(), |g, t| g.gcd(t));
        let gcd_vector = IntColumn::new(direction.entries().iter().map(|v| v * &g).collect());
        let multipliers = scales.into_iter().map(|t| t / &g).collect();
        Ok(CollinearGroup { gcd_vector, multipliers, member_indices: members })
    }

    /// Multipliers in ascending order, for order-insensitive comparison.
    pub fn sorted_multipliers(&self) -> Vec<BigInt> {
        let mut v = self.multipliers.clone();
        v.sort();
        v
    }
}

/// Which closed form the convolution takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanShape {
    /// Two or more residual columns: a residual partition remains.
    General,
    /// One residual column `c`: the residual is `δ(S(k), k0·c)`.
    SingleResidualColumn,
    /// Every column belongs to a group.
    NoResidual,
}

/// Groups, residual columns and the resulting shape for one matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvolutionPlan {
    pub matrix: AugmentedMatrix,
    pub groups: Vec<CollinearGroup>,
    pub residual_indices: Vec<usize>,
    pub shape: PlanShape,
}

impl ConvolutionPlan {
    /// A plan with explicitly chosen groups; all other columns are residual.
    pub fn new(matrix: AugmentedMatrix, groups: Vec<CollinearGroup>) -> Result<Self> {
        let mut used = vec![false; matrix.cols()];
        for g in &groups {
            let check = CollinearGroup::from_members(&matrix, g.member_indices.clone())?;
            if &check != g {
                return Err(Error::ColumnClass {
                    column: g.member_indices[0],
                    reason: "group data does not match the matrix".into(),
                });
            }
            for &j in &g.member_indices {
                if std::mem::replace(&mut used[j], true) {
                    return Err(Error::ColumnClass { column: j, reason: "column is in two groups".into() });
                }
            }
        }
        let residual_indices: Vec<usize> = (0..matrix.cols()).filter(|&j| !used[j]).collect();
        let shape = match residual_indices.len() {
            0 => PlanShape::NoResidual,
            1 => PlanShape::SingleResidualColumn,
            _ => PlanShape::General,
        };
        Ok(ConvolutionPlan { matrix, groups, residual_indices, shape })
    }

    /// Number of summation indices the convolution introduces.
    pub fn loop_count(&self) -> usize {
        self.groups.len() + usize::from(self.shape == PlanShape::SingleResidualColumn)
    }

    /// Symbol index of the first loop variable.
    pub fn loop_base(&self) -> usize {
        self.matrix.symbol_count()
    }

    /// `S(k) = S − Σ_{p < upto} k_p·C_p`, as forms over the extended scope.
    pub fn shifted_argument(&self, upto: usize) -> Vec<LinearForm> {
        let base = self.loop_base();
        (0..self.matrix.rows())
            .map(|r| {
                self.groups[..upto].iter().enumerate().fold(self.matrix.symbolic()[r].clone(), |acc, (p, g)| {
                    acc.combine(&LinearForm::symbol(base + p), &-g.gcd_vector.get(r))
                })
            })
            .collect()
    }

    /// The residual partition `W(S(k), D̄)`, when at least one residual column exists.
    pub fn residual_matrix(&self) -> Option<AugmentedMatrix> {
        if self.residual_indices.is_empty() {
            return None;
        }
        let columns = self.residual_indices.iter().map(|&j| self.matrix.column(j).clone()).collect();
        let scope = self.loop_base() + self.groups.len();
        Some(
            AugmentedMatrix::new(self.shifted_argument(self.groups.len()), columns, scope)
                .expect("residual keeps the row count"),
        )
    }
}

/// Splits the columns into maximal collinear groups (in order of first
/// appearance) and residual singletons.
pub fn detect_groups(matrix: &AugmentedMatrix) -> Result<ConvolutionPlan> {
    let p = matrix.cols();
    let mut assigned = vec![false; p];
    let mut groups = Vec::new();
    for i in 0..p {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..p).filter(|&j| !assigned[j] && matrix.column(i).is_collinear_with(matrix.column(j))).collect();
        if members.len() >= 2 {
            members.iter().for_each(|&j| assigned[j] = true);
            groups.push(CollinearGroup::from_members(matrix, members)?);
        }
    }
    ConvolutionPlan::new(matrix.clone(), groups)
}

/// Weights `y` with `y·c ≥ 1` for every lex-positive column `c` given.
///
/// Built row by row: a column whose last nonzero entry sits in row `r` only
/// depends on `y_1..y_r`, so `y_r` can be raised until all such columns are
/// covered.
fn positive_weights(columns: &[IntColumn], rows: usize) -> Vec<BigInt> {
    let mut y: Vec<BigInt> = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut yr = BigInt::one();
        for c in columns {
            let last_nonzero = c.entries().iter().rposition(|v| !v.is_zero());
            if last_nonzero != Some(r) {
                continue;
            }
            let partial: BigInt = (0..r).map(|k| &y[k] * c.get(k)).sum();
            // need partial + y_r·c_r ≥ 1 with c_r > 0
            let need = (BigInt::one() - partial).div_ceil(c.get(r));
            if need > yr {
                yr = need;
            }
        }
        y.push(yr);
    }
    y
}

fn dot_form(y: &[BigInt], forms: &[LinearForm]) -> LinearForm {
    forms.iter().zip(y).fold(LinearForm::zero(), |acc, (f, w)| acc.combine(f, w))
}

fn dot(y: &[BigInt], c: &IntColumn) -> BigInt {
    c.entries().iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Upper bounds for `k_p` given `S(k)` with the earlier loops subtracted.
///
/// On a row without negative entries every term of `S_r = Σ x_j c_jr` is
/// nonnegative, so `k_p·C_pr ≤ S_r`.  Without such a row the same argument
/// is applied to the weighted sum `y·S`.
fn group_bounds(plan: &ConvolutionPlan, p: usize, shifted: &[LinearForm]) -> Vec<LinearForm> {
    let m = &plan.matrix;
    let cp = &plan.groups[p].gcd_vector;
    let mut bounds: Vec<LinearForm> = (0..m.rows())
        .filter(|&r| cp.get(r).is_positive() && m.columns().iter().all(|c| !c.get(r).is_negative()))
        .map(|r| shifted[r].div(cp.get(r)))
        .collect();
    if bounds.is_empty() {
        let y = positive_weights(m.columns(), m.rows());
        bounds.push(dot_form(&y, shifted).div(&dot(&y, cp)));
    }
    bounds
}

/// Bounds `max_i ⌊S_i / c_i⌋` over the positive entries of `c`.
fn delta_bounds(shifted: &[LinearForm], c: &IntColumn) -> Vec<LinearForm> {
    (0..c.len()).filter(|&r| c.get(r).is_positive()).map(|r| shifted[r].div(c.get(r))).collect()
}

fn group_factor(k: LinearForm, group: &CollinearGroup) -> FormulaNode {
    let m = group.multipliers.len();
    if m >= 2 && group.multipliers.iter().all(One::is_one) {
        FormulaNode::Binomial { top: k.add_constant(&BigInt::from(m - 1)), bottom: (m - 1) as u32 }
    } else {
        let gens = ScalarGeneratorSet::new(group.multipliers.clone()).expect("multipliers are positive");
        FormulaNode::scalar(k, gens)
    }
}

/// Assembles the convolution for `plan` around an already reduced residual.
///
/// `residual` must be the reduction of [`ConvolutionPlan::residual_matrix`]
/// for the General shape and is ignored otherwise.
pub fn assemble_convolution(plan: &ConvolutionPlan, residual: Option<FormulaNode>) -> Result<FormulaNode> {
    if plan.groups.is_empty() {
        return Err(Error::ColumnClass { column: 0, reason: "convolution plan without groups".into() });
    }
    let base = plan.loop_base();
    let r = plan.groups.len();
    let mut loops = Vec::new();
    let mut factors = Vec::new();
    let delta_groups = if plan.shape == PlanShape::NoResidual { r - 1 } else { r };
    for p in 0..delta_groups {
        let shifted = plan.shifted_argument(p);
        loops.push(LoopVar { symbol: base + p, kind: BoundKind::Min, bounds: group_bounds(plan, p, &shifted) });
    }
    match plan.shape {
        PlanShape::General => {
            let residual = residual.ok_or_else(|| Error::ColumnClass {
                column: plan.residual_indices[0],
                reason: "general convolution needs the reduced residual".into(),
            })?;
            factors.push(residual);
        }
        PlanShape::SingleResidualColumn => {
            let c = plan.matrix.column(plan.residual_indices[0]);
            let shifted = plan.shifted_argument(r);
            let k0 = LinearForm::symbol(base + r);
            loops.push(LoopVar { symbol: base + r, kind: BoundKind::Max, bounds: delta_bounds(&shifted, c) });
            let pairs = shifted.into_iter().enumerate().map(|(i, s)| (s, k0.scale(c.get(i)))).collect();
            factors.push(FormulaNode::PointDelta { pairs });
        }
        PlanShape::NoResidual => {
            let cr = &plan.groups[r - 1].gcd_vector;
            let shifted = plan.shifted_argument(r - 1);
            let kr = LinearForm::symbol(base + r - 1);
            loops.push(LoopVar { symbol: base + r - 1, kind: BoundKind::Max, bounds: delta_bounds(&shifted, cr) });
            let pairs = shifted.into_iter().enumerate().map(|(i, s)| (s, kr.scale(cr.get(i)))).collect();
            factors.push(FormulaNode::PointDelta { pairs });
        }
    }
    for (p, g) in plan.groups.iter().enumerate() {
        factors.push(group_factor(LinearForm::symbol(base + p), g));
    }
    Ok(FormulaNode::Convolution { loops, body: Box::new(FormulaNode::Product { factors }) })
}

/// Reduces the residual partition `W(S(k), D̄)` with the loop variables as
/// additional symbols.
pub fn reduce_residual(plan: &ConvolutionPlan, config: &ReductionConfig) -> Result<(FormulaNode, ReductionTrace)> {
    let residual = plan.residual_matrix().ok_or_else(|| Error::ColumnClass {
        column: 0,
        reason: "plan has no residual columns".into(),
    })?;
    driver::reduce_normalized_subproblem(residual, config)
}

/// The full convolution for `plan`, reducing the residual when needed.
pub fn build_convolution(plan: &ConvolutionPlan, config: &ReductionConfig) -> Result<FormulaNode> {
    let residual = match plan.shape {
        PlanShape::General => Some(reduce_residual(plan, config)?.0),
        _ => None,
    };
    assemble_convolution(plan, residual)
}
