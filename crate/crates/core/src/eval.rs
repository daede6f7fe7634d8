//! Evaluation of formulas at concrete points, the brute-force lattice point
//! oracle, and grid verification of one against the other.

use crate::error::{Error, Result};
use crate::model::{BoundKind, Congruence, FormulaNode, GuardSet, LinearForm, LoopVar, Rat};
use crate::scalar::{binomial, normalize_negative_generators, ScalarCache, ScalarLeaf};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// Evaluates formulas, keeping scalar counts cached between calls.
///
/// The environment holds the original arguments followed by loop variables
/// bound while walking convolutions.
#[derive(Debug, Default)]
pub struct Evaluator {
    cache: ScalarCache,
    env: Vec<i64>,
}

fn congruence_holds(c: &Congruence, env: &[i64]) -> Result<bool> {
    let v = c.form.value_at(env)?;
    let Some(v) = v.as_integer() else { return Ok(false) };
    let m = c.modulus.to_i128().ok_or_else(|| Error::Overflow(c.modulus.to_string()))?;
    let r = c.residue.to_i128().ok_or_else(|| Error::Overflow(c.residue.to_string()))?;
    Ok((v - r).rem_euclid(m) == 0)
}

/// True when every guard factor is 1; congruences are checked first.
pub fn guards_hold(guards: &GuardSet, env: &[i64]) -> Result<bool> {
    for c in &guards.congruences {
        if !congruence_holds(c, env)? {
            return Ok(false);
        }
    }
    for h in &guards.heavisides {
        if !h.value_at(env)?.is_nonneg() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn to_i64(v: i128, what: &LinearForm) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(format!("value {v} of {what}")))
}

fn loop_bound(lv: &LoopVar, env: &[i64]) -> Result<i64> {
    let mut best: Option<i128> = None;
    for b in &lv.bounds {
        let v = b.value_at(env)?.floor();
        best = Some(match (best, lv.kind) {
            (None, _) => v,
            (Some(x), BoundKind::Min) => x.min(v),
            (Some(x), BoundKind::Max) => x.max(v),
        });
    }
    match best {
        Some(v) => Ok(i64::try_from(v.max(-1)).map_err(|_| Error::Overflow(format!("loop bound {v}")))?),
        None => Err(Error::Document(format!("loop over symbol {} has no bound", lv.symbol))),
    }
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Value of `formula` at `s`.
    pub fn evaluate(&mut self, formula: &FormulaNode, s: &[i64]) -> Result<BigInt> {
        self.env.clear();
        self.env.extend_from_slice(s);
        self.eval(formula)
    }

    fn eval(&mut self, node: &FormulaNode) -> Result<BigInt> {
        match node {
            FormulaNode::Constant { value } => Ok(value.clone()),
            FormulaNode::Sum { children } => {
                let mut acc = BigInt::zero();
                for c in children {
                    acc += self.eval(c)?;
                }
                Ok(acc)
            }
            FormulaNode::Product { factors } => {
                let mut acc = BigInt::one();
                for f in factors {
                    let v = self.eval(f)?;
                    if v.is_zero() {
                        return Ok(v);
                    }
                    acc *= v;
                }
                Ok(acc)
            }
            FormulaNode::Term { coeff, guards, payload } => {
                if !guards_hold(guards, &self.env)? {
                    return Ok(BigInt::zero());
                }
                let v = self.eval(payload)?;
                if v.is_zero() {
                    return Ok(v);
                }
                let v = v * coeff;
                Ok(if guards.sign < 0 { -v } else { v })
            }
            FormulaNode::ScalarPartition { argument, generators } => {
                if !generators.all_positive() {
                    let leaf = normalize_negative_generators(ScalarLeaf::new(argument.clone(), generators.clone()))?;
                    return self.eval(&leaf.into_formula());
                }
                let v = argument.value_at(&self.env)?;
                match v.as_integer() {
                    Some(x) if x >= 0 => self.cache.count(to_i64(x, argument)?, generators.generators()),
                    _ => Ok(BigInt::zero()),
                }
            }
            FormulaNode::Binomial { top, bottom } => {
                let v = top.value_at(&self.env)?;
                match v.as_integer() {
                    Some(x) if x >= 0 => Ok(binomial(BigInt::from(x), *bottom)),
                    _ => Ok(BigInt::zero()),
                }
            }
            FormulaNode::PointDelta { pairs } => {
                for (a, b) in pairs {
                    let (x, y) = (a.value_at(&self.env)?, b.value_at(&self.env)?);
                    if x.num * y.den != y.num * x.den {
                        return Ok(BigInt::zero());
                    }
                }
                Ok(BigInt::one())
            }
            FormulaNode::Convolution { loops, body } => self.eval_loops(loops, body),
        }
    }

    fn eval_loops(&mut self, loops: &[LoopVar], body: &FormulaNode) -> Result<BigInt> {
        let Some((first, rest)) = loops.split_first() else {
            return self.eval(body);
        };
        let bound = loop_bound(first, &self.env)?;
        if self.env.len() <= first.symbol {
            self.env.resize(first.symbol + 1, 0);
        }
        let mut acc = BigInt::zero();
        for k in 0..=bound {
            self.env[first.symbol] = k;
            acc += self.eval_loops(rest, body)?;
        }
        Ok(acc)
    }

    /// Nonzero contributions of scalar-partition leaves at `s`, keyed by
    /// their position in the tree (child indices from the root).
    ///
    /// Leaves inside convolutions are reported with their summed value.
    pub fn leaf_breakdown(&mut self, formula: &FormulaNode, s: &[i64]) -> Result<Vec<(Vec<usize>, BigInt)>> {
        self.env.clear();
        self.env.extend_from_slice(s);
        let mut out = Vec::new();
        self.breakdown(formula, &mut Vec::new(), &BigInt::one(), &mut out)?;
        Ok(out)
    }

    fn breakdown(
        &mut self,
        node: &FormulaNode,
        path: &mut Vec<usize>,
        weight: &BigInt,
        out: &mut Vec<(Vec<usize>, BigInt)>,
    ) -> Result<()> {
        match node {
            FormulaNode::Sum { children } => {
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    self.breakdown(c, path, weight, out)?;
                    path.pop();
                }
            }
            FormulaNode::Term { coeff, guards, payload } => {
                if guards_hold(guards, &self.env)? {
                    let w = weight * coeff * i32::from(guards.sign);
                    path.push(0);
                    self.breakdown(payload, path, &w, out)?;
                    path.pop();
                }
            }
            other => {
                let v = self.eval(other)? * weight;
                if !v.is_zero() {
                    out.push((path.clone(), v));
                }
            }
        }
        Ok(())
    }
}

/// Value of `formula` at `s` with a fresh evaluator.
pub fn evaluate(formula: &FormulaNode, s: &[i64]) -> Result<BigInt> {
    Evaluator::new().evaluate(formula, s)
}

/// Brute-force counter for `#{x ≥ 0 : D·x = s}` over a fixed nonnegative,
/// definite matrix.  Partial counts are memoized across queries.
#[derive(Debug)]
pub struct OracleCounter {
    // columns sorted by decreasing L1 norm
    columns: Vec<Vec<i64>>,
    rows: usize,
    memo: HashMap<(usize, Vec<i64>), BigInt>,
}

impl OracleCounter {
    /// Bound on memo entries before the memo is flushed.
    pub const MAX_MEMO: usize = 1 << 21;

    pub fn new(columns: &[Vec<BigInt>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut cols = Vec::with_capacity(columns.len());
        for (i, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!("column {} has {} entries", i + 1, c.len())));
            }
            if let Some(v) = c.iter().find(|v| v.is_negative()) {
                return Err(Error::NegativeEntry { column: i + 1, value: v.to_string() });
            }
            if !c.iter().any(Signed::is_positive) {
                return Err(Error::NonDefinite(i + 1));
            }
            let c: Vec<i64> = c
                .iter()
                .map(|v| v.to_i64().ok_or_else(|| Error::Overflow(v.to_string())))
                .collect::<Result<_>>()?;
            cols.push(c);
        }
        cols.sort_by_key(|c| std::cmp::Reverse(c.iter().sum::<i64>()));
        Ok(OracleCounter { columns: cols, rows, memo: HashMap::new() })
    }

    pub fn count(&mut self, s: &[BigInt]) -> Result<BigInt> {
        if s.len() != self.rows {
            return Err(Error::DimensionMismatch(format!("point has {} entries, expected {}", s.len(), self.rows)));
        }
        if s.iter().any(Signed::is_negative) {
            return Ok(BigInt::zero());
        }
        let s: Vec<i64> = s
            .iter()
            .map(|v| v.to_i64().ok_or_else(|| Error::Overflow(v.to_string())))
            .collect::<Result<_>>()?;
        if self.memo.len() > Self::MAX_MEMO {
            self.memo.clear();
        }
        Ok(self.count_from(0, s))
    }

    fn count_from(&mut self, depth: usize, residual: Vec<i64>) -> BigInt {
        if depth == self.columns.len() {
            return BigInt::from(u8::from(residual.iter().all(|&v| v == 0)));
        }
        let col = self.columns[depth].clone();
        // x ≤ min over positive entries of ⌊residual_r / c_r⌋
        let bound = col
            .iter()
            .zip(&residual)
            .filter(|(c, _)| **c > 0)
            .map(|(c, r)| r / c)
            .min()
            .expect("definite column");
        if depth + 1 == self.columns.len() {
            let hit = (0..=bound).any(|x| col.iter().zip(&residual).all(|(c, r)| r - x * c == 0));
            return BigInt::from(u8::from(hit));
        }
        if let Some(v) = self.memo.get(&(depth, residual.clone())) {
            return v.clone();
        }
        let mut total = BigInt::zero();
        let mut rest = residual.clone();
        for x in 0..=bound {
            if x > 0 {
                for (r, c) in rest.iter_mut().zip(&col) {
                    *r -= c;
                }
            }
            total += self.count_from(depth + 1, rest.clone());
        }
        self.memo.insert((depth, residual), total.clone());
        total
    }
}

/// `#{x ≥ 0 : D·x = s}` for the columns of `D`.
pub fn oracle_count(columns: &[Vec<BigInt>], s: &[BigInt]) -> Result<BigInt> {
    OracleCounter::new(columns)?.count(s)
}

/// First disagreement found by [`verify_grid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub point: Vec<i64>,
    pub expected: BigInt,
    pub got: BigInt,
    /// Tree positions and values of the leaves contributing at `point`.
    pub contributions: Vec<(Vec<usize>, BigInt)>,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub points: usize,
    pub elapsed: Duration,
    pub mismatch: Option<Mismatch>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// All points of the box `Π [lo_r, hi_r]`, first coordinate fastest.
pub fn grid_points(bounds: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in bounds.iter().rev() {
        out = out
            .into_iter()
            .flat_map(|tail| {
                (lo..=hi).map(move |v| {
                    let mut p = vec![v];
                    p.extend_from_slice(&tail);
                    p
                })
            })
            .collect();
    }
    for p in &mut out {
        p.reverse();
        p.rotate_left(0);
    }
    out.sort();
    out
}

/// Compares `formula` with the oracle for `D` at every point of the box.
///
/// Points are split across `workers` threads, each with its own caches;
/// `workers = 1` runs on the calling thread.
pub fn verify_grid(
    columns: &[Vec<BigInt>],
    formula: &FormulaNode,
    bounds: &[(i64, i64)],
    workers: usize,
) -> Result<GridReport> {
    let start = Instant::now();
    let points = grid_points(bounds);
    OracleCounter::new(columns)?;
    let chunk = points.len().div_ceil(workers.max(1) * 4).max(1);
    let check = |chunk: &[Vec<i64>]| -> Result<Option<(Vec<i64>, BigInt, BigInt)>> {
        let mut ev = Evaluator::new();
        let mut oracle = OracleCounter::new(columns)?;
        for p in chunk {
            let got = ev.evaluate(formula, p)?;
            let big: Vec<BigInt> = p.iter().map(|&v| v.into()).collect();
            let expected = oracle.count(&big)?;
            if got != expected {
                return Ok(Some((p.clone(), expected, got)));
            }
        }
        Ok(None)
    };
    let results: Vec<Option<(Vec<i64>, BigInt, BigInt)>> = if workers <= 1 {
        points.chunks(chunk).map(check).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Document(format!("thread pool: {e}")))?;
        pool.install(|| points.par_chunks(chunk).map(check).collect::<Result<_>>())?
    };
    let mismatch = match results.into_iter().flatten().next() {
        Some((point, expected, got)) => {
            let contributions = Evaluator::new().leaf_breakdown(formula, &point)?;
            Some(Mismatch { point, expected, got, contributions })
        }
        None => None,
    };
    Ok(GridReport { points: points.len(), elapsed: start.elapsed(), mismatch })
}

/// Evaluates an exact rational at a point; convenience for callers that
/// need the raw value of a form.
pub fn form_value(form: &LinearForm, s: &[i64]) -> Result<Rat> {
    form.value_at(s)
}
