//! The iterative reduction: eliminate the last row of every pending matrix
//! until only scalar partitions (and the leaves of collinear convolutions)
//! remain.

use crate::cayley::{
    classify_column, compact_contribution, expand_numerator, expanded_contribution, normalize_matrix,
    ColumnTag, Normalized,
};
use crate::collinear::{assemble_convolution, detect_groups, PlanShape};
use crate::error::Result;
use crate::eval::oracle_count;
use crate::model::{
    check_permutation, validate_problem, AugmentedMatrix, BoundKind, FormulaNode, GuardSet, IntColumn,
    LinearForm, LoopVar, NumeratorRecord, ReductionTrace, ScalarGeneratorSet, StepClass, TraceStep,
};
use crate::scalar::{normalize_negative_generators, ScalarLeaf};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

/// How columns with coprime entries are eliminated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NpPolicy {
    /// P-columns use the single-matrix compact form (the default).
    #[default]
    CompactWhenP,
    /// Every column goes through the expanded residue-class form.
    AlwaysGeneral,
}

/// Options for [`reduce`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionConfig {
    /// Permutation applied to the rows of the top-level matrix: row `k` of
    /// the reduced problem is row `row_order[k]` of the input.
    pub row_order: Option<Vec<usize>>,
    pub np_policy: NpPolicy,
}

/// A guarded, weighted partition awaiting reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingItem {
    pub matrix: AugmentedMatrix,
    pub accumulated: GuardSet,
    pub coefficient: BigInt,
}

struct Ctx<'a> {
    config: &'a ReductionConfig,
    path: Vec<usize>,
    depth: usize,
}

impl Ctx<'_> {
    fn child(&self, extra: &[usize], eliminated: bool) -> Ctx<'_> {
        let mut path = self.path.clone();
        path.extend_from_slice(extra);
        Ctx { config: self.config, path, depth: self.depth + usize::from(eliminated) }
    }
}

type Reduced = (FormulaNode, Vec<TraceStep>);

/// Reduces `W(s, D)` for a validated top-level matrix to a formula over
/// scalar partitions, together with the trace of every step taken.
pub fn reduce(matrix: &AugmentedMatrix, config: &ReductionConfig) -> Result<(FormulaNode, ReductionTrace)> {
    validate_problem(matrix)?;
    let matrix = match &config.row_order {
        Some(order) => permute_rows(matrix, order)?,
        None => matrix.clone(),
    };
    let ctx = Ctx { config, path: Vec::new(), depth: 0 };
    let (node, steps) = reduce_item(normalize_matrix(matrix), &ctx)?;
    Ok((node, ReductionTrace { steps }))
}

/// Reduces an arbitrary (possibly intermediate) partition: the matrix is
/// normalized first and every emitted guard is kept.
pub fn reduce_normalized_subproblem(
    matrix: AugmentedMatrix,
    config: &ReductionConfig,
) -> Result<(FormulaNode, ReductionTrace)> {
    let ctx = Ctx { config, path: Vec::new(), depth: 0 };
    let (node, steps) = reduce_item(normalize_matrix(matrix), &ctx)?;
    Ok((node, ReductionTrace { steps }))
}

/// Reduces every item of a queue and sums the weighted results.
pub fn reduce_pending(items: Vec<PendingItem>, config: &ReductionConfig) -> Result<FormulaNode> {
    let children = items
        .into_par_iter()
        .enumerate()
        .map(|(idx, item)| {
            let ctx = Ctx { config, path: vec![idx], depth: 0 };
            let (node, _) = reduce_item(normalize_matrix(item.matrix), &ctx)?;
            Ok(FormulaNode::term(item.coefficient, item.accumulated, node))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FormulaNode::Sum { children })
}

fn permute_rows(matrix: &AugmentedMatrix, order: &[usize]) -> Result<AugmentedMatrix> {
    check_permutation(order, matrix.rows())?;
    let symbolic = order.iter().map(|&r| matrix.symbolic()[r].clone()).collect();
    let columns = matrix
        .columns()
        .iter()
        .map(|c| IntColumn::new(order.iter().map(|&r| c.get(r).clone()).collect()))
        .collect();
    AugmentedMatrix::new(symbolic, columns, matrix.symbol_count())
}

/// A Heaviside on a negative constant makes the whole term vanish.
fn is_dead(heavisides: &[LinearForm]) -> bool {
    heavisides.iter().any(|h| h.is_constant() && h.constant_term().is_negative())
}

/// Wraps the reduction of a normalized matrix in its sign and guards.
fn reduce_item(normalized: Normalized, ctx: &Ctx) -> Result<Reduced> {
    let Normalized { sign, heavisides, matrix, .. } = normalized;
    if is_dead(&heavisides) {
        return Ok((FormulaNode::zero(), Vec::new()));
    }
    let (body, steps) = reduce_matrix(&matrix, ctx)?;
    let mut guards = GuardSet::with_sign(sign);
    heavisides.into_iter().for_each(|h| guards.push_heaviside(h));
    let node = if guards.is_trivial() { body } else { FormulaNode::guarded(guards, body) };
    Ok((node, steps))
}

/// Reduces a normalized matrix (all columns lex-positive).
fn reduce_matrix(matrix: &AugmentedMatrix, ctx: &Ctx) -> Result<Reduced> {
    let n = matrix.rows();
    if n == 1 {
        let gens = ScalarGeneratorSet::new(matrix.row(0))?;
        let leaf = normalize_negative_generators(ScalarLeaf::new(matrix.symbolic()[0].clone(), gens))?;
        return Ok((leaf.into_formula(), Vec::new()));
    }
    if matrix.cols() == 1 {
        return Ok((single_column_delta(matrix), Vec::new()));
    }
    if has_eliminable_collinear_pair(matrix) {
        return reduce_collinear(matrix, ctx);
    }
    let parts = (0..matrix.cols())
        .into_par_iter()
        .map(|i| column_contribution(matrix, i, ctx))
        .collect::<Result<Vec<_>>>()?;
    let mut children = Vec::new();
    let mut steps = Vec::new();
    for (node, s) in parts {
        if let Some(node) = node {
            children.push(node);
        }
        steps.extend(s);
    }
    let node = if children.is_empty() { FormulaNode::zero() } else { FormulaNode::Sum { children } };
    Ok((node, steps))
}

/// `W(S, {c})` with `n ≥ 2` rows: one solution exactly when `S = k·c`.
fn single_column_delta(matrix: &AugmentedMatrix) -> FormulaNode {
    let c = matrix.column(0);
    let k = matrix.symbol_count();
    let kf = LinearForm::symbol(k);
    let bounds = (0..c.len())
        .filter(|&r| c.get(r).is_positive())
        .map(|r| matrix.symbolic()[r].div(c.get(r)))
        .collect();
    let pairs = (0..c.len()).map(|r| (matrix.symbolic()[r].clone(), kf.scale(c.get(r)))).collect();
    FormulaNode::Convolution {
        loops: vec![LoopVar { symbol: k, kind: BoundKind::Max, bounds }],
        body: Box::new(FormulaNode::PointDelta { pairs }),
    }
}

/// Two collinear columns with positive last entries would produce a zero
/// column on elimination; such matrices go through the collinear reducer.
/// Collinear columns with a zero last entry are harmless and are carried.
fn has_eliminable_collinear_pair(matrix: &AugmentedMatrix) -> bool {
    let cols: Vec<&IntColumn> = matrix.columns().iter().filter(|c| c.last().is_positive()).collect();
    cols.iter()
        .enumerate()
        .any(|(a, ca)| cols[a + 1..].iter().any(|cb| ca.is_collinear_with(cb)))
}

fn reduce_collinear(matrix: &AugmentedMatrix, ctx: &Ctx) -> Result<Reduced> {
    let plan = detect_groups(matrix)?;
    let mut step = TraceStep::new(ctx.path.clone(), ctx.depth, None, StepClass::CollinearGroup);
    step.groups = plan.groups.clone();
    step.matrix = plan.residual_matrix();
    let mut steps = vec![step];
    let residual = match plan.shape {
        PlanShape::General => {
            let residual = plan.residual_matrix().expect("general plans have residual columns");
            // The residual branch is labelled one past the last column index.
            let (node, sub) = reduce_item(normalize_matrix(residual), &ctx.child(&[matrix.cols()], false))?;
            steps.extend(sub);
            Some(node)
        }
        _ => None,
    };
    Ok((assemble_convolution(&plan, residual)?, steps))
}

fn column_contribution(matrix: &AugmentedMatrix, i: usize, ctx: &Ctx) -> Result<(Option<FormulaNode>, Vec<TraceStep>)> {
    let class = classify_column(matrix, i)?;
    let general = ctx.config.np_policy == NpPolicy::AlwaysGeneral;
    match class.tag {
        ColumnTag::ZeroTail => {
            let step = TraceStep::new(child_path(ctx, &[i]), ctx.depth + 1, Some(i), StepClass::ZeroTail);
            Ok((None, vec![step]))
        }
        ColumnTag::P if !general => {
            let normalized = normalize_matrix(compact_contribution(matrix, i)?);
            let mut step = TraceStep::new(child_path(ctx, &[i]), ctx.depth + 1, Some(i), StepClass::P);
            record(&mut step, &normalized);
            let (node, sub) = reduce_item(normalized, &ctx.child(&[i], true))?;
            let mut steps = vec![step];
            steps.extend(sub);
            Ok((Some(node).filter(|n| !n.is_zero_constant()), steps))
        }
        tag => {
            let class_tag = match tag {
                ColumnTag::Z => StepClass::Z,
                ColumnTag::NP => StepClass::NP,
                _ => StepClass::P,
            };
            let table = expand_numerator(matrix, i)?;
            let mut head = TraceStep::new(child_path(ctx, &[i]), ctx.depth + 1, Some(i), class_tag);
            head.numerator = Some(NumeratorRecord {
                modulus: table.modulus.into(),
                factors: table.factors,
                mass: table.mass(),
                entries: table.coefficients.len(),
            });
            let mut steps = vec![head];
            let mut residue_terms = Vec::new();
            for class in expanded_contribution(matrix, i, &table)? {
                let residue = class.residue as usize;
                let mut items = Vec::new();
                for (idx, item) in class.items.into_iter().enumerate() {
                    let normalized = normalize_matrix(item.matrix);
                    let mut step = TraceStep::new(
                        child_path(ctx, &[i, residue, idx]),
                        ctx.depth + 1,
                        Some(i),
                        class_tag,
                    );
                    record(&mut step, &normalized);
                    step.congruences = item.congruences.clone();
                    let (node, sub) = reduce_item(normalized, &ctx.child(&[i, residue, idx], true))?;
                    steps.push(step);
                    steps.extend(sub);
                    if node.is_zero_constant() {
                        continue;
                    }
                    let guards = GuardSet { sign: 1, heavisides: Vec::new(), congruences: item.congruences };
                    items.push(FormulaNode::term(item.coeff, guards, node));
                }
                if items.is_empty() {
                    continue;
                }
                let mut guards = GuardSet::default();
                guards.congruences.extend(class.congruence);
                residue_terms.push(FormulaNode::term(BigInt::one(), guards, FormulaNode::Sum { children: items }));
            }
            let node = (!residue_terms.is_empty()).then_some(FormulaNode::Sum { children: residue_terms });
            Ok((node, steps))
        }
    }
}

fn child_path(ctx: &Ctx, extra: &[usize]) -> Vec<usize> {
    let mut p = ctx.path.clone();
    p.extend_from_slice(extra);
    p
}

fn record(step: &mut TraceStep, normalized: &Normalized) {
    step.sign = normalized.sign;
    step.heavisides = normalized.heavisides.clone();
    step.row_divisors = normalized.row_divisors.clone();
    step.matrix = Some(normalized.matrix.clone());
}

/// Checks `W(s, D) − W(s − c_1, D) = W(s, D \ c_1)` with oracle counts.
pub fn recursion_identity_check(columns: &[Vec<BigInt>], s: &[BigInt]) -> Result<bool> {
    let full = oracle_count(columns, s)?;
    let shifted: Vec<BigInt> = s.iter().zip(&columns[0]).map(|(a, b)| a - b).collect();
    let minus = oracle_count(columns, &shifted)?;
    let rest = if columns.len() > 1 {
        oracle_count(&columns[1..], s)?
    } else {
        BigInt::from(u8::from(s.iter().all(Zero::is_zero)))
    };
    Ok(full - minus == rest)
}
