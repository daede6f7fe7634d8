//! Scalar partition counting and the leaf normalization that turns negative
//! generators into positive ones.

use crate::error::{Error, Result};
use crate::model::{FormulaNode, GuardSet, LinearForm, ScalarGeneratorSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;

fn positive_generators(d: &[BigInt]) -> Result<Vec<Option<u64>>> {
    d.iter()
        .map(|g| {
            if !g.is_positive() {
                Err(Error::NonPositiveGenerator(g.to_string()))
            } else {
                // Generators too large for u64 can never fit into an evaluable argument.
                Ok(g.to_u64())
            }
        })
        .collect()
}

/// Number of nonnegative solutions of `Σ x_i d_i = s`; zero for `s < 0`.
pub fn count_scalar(s: i64, d: &[BigInt]) -> Result<BigInt> {
    let gens = positive_generators(d)?;
    if s < 0 {
        return Ok(BigInt::zero());
    }
    let s = s as u64;
    let usable: Vec<u64> = gens.into_iter().flatten().filter(|&g| g <= s).collect();
    Ok(coin_count(s, &usable))
}

fn coin_count(s: u64, gens: &[u64]) -> BigInt {
    if s == 0 {
        return BigInt::one();
    }
    let g = gens.iter().fold(0u64, |a, &b| a.gcd(&b));
    if g == 0 || !s.is_multiple_of(g) {
        return BigInt::zero();
    }
    let s = (s / g) as usize;
    let mut table = vec![BigInt::zero(); s + 1];
    table[0] = BigInt::one();
    for &d in gens {
        let d = (d / g) as usize;
        for t in d..=s {
            let add = table[t - d].clone();
            table[t] += add;
        }
    }
    table.swap_remove(s)
}

/// `W(s, {n})`: 1 when `s ≥ 0` and `n | s`, else 0.
pub fn count_scalar_single(s: i64, n: u64) -> u8 {
    u8::from(s >= 0 && (s as u64).is_multiple_of(n))
}

/// `W(k, {1,…,1})` with `m` ones, i.e. `C(k+m−1, m−1)`; zero for `k < 0`.
pub fn count_scalar_units(k: i64, m: u32) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    binomial(BigInt::from(k) + m - 1, m.saturating_sub(1))
}

/// `C(n, r)` for `n ≥ 0`; zero when `r > n`.
pub fn binomial(n: BigInt, r: u32) -> BigInt {
    if n.is_negative() || BigInt::from(r) > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * (&n - i) / (i + 1);
    }
    acc
}

/// Memoized scalar counts, keyed by the sorted generator multiset.
///
/// Each entry keeps one dynamic-programming layer per generator so that a
/// table can be extended to larger arguments without recomputation.  The
/// cache is not shared between threads; parallel callers keep one each.
#[derive(Debug, Default)]
pub struct ScalarCache {
    tables: HashMap<Vec<u64>, Layers>,
    cells: usize,
}

#[derive(Debug)]
struct Layers {
    gens: Vec<usize>,
    // layers[k][t] counts partitions of t using the first k+1 generators
    layers: Vec<Vec<BigInt>>,
}

impl Layers {
    fn new(gens: Vec<usize>) -> Self {
        let layers = gens.iter().map(|_| vec![BigInt::one()]).collect();
        Layers { gens, layers }
    }

    fn extend_to(&mut self, s: usize) -> usize {
        let have = self.layers[0].len();
        if s < have {
            return 0;
        }
        for k in 0..self.gens.len() {
            let d = self.gens[k];
            for t in have..=s {
                let mut v = if k == 0 {
                    BigInt::zero()
                } else {
                    self.layers[k - 1][t].clone()
                };
                if t >= d {
                    v += &self.layers[k][t - d];
                } else if k == 0 && t == 0 {
                    v = BigInt::one();
                }
                self.layers[k].push(v);
            }
        }
        (s + 1 - have) * self.gens.len()
    }

    fn get(&self, s: usize) -> &BigInt {
        &self.layers[self.gens.len() - 1][s]
    }
}

impl ScalarCache {
    /// Upper bound on cached table cells before the cache is flushed.
    pub const MAX_CELLS: usize = 1 << 22;

    pub fn new() -> Self {
        Self::default()
    }

    /// Same contract as [`count_scalar`], memoized.
    pub fn count(&mut self, s: i64, d: &[BigInt]) -> Result<BigInt> {
        let gens = positive_generators(d)?;
        if s < 0 {
            return Ok(BigInt::zero());
        }
        if s == 0 {
            return Ok(BigInt::one());
        }
        let su = s as u64;
        let mut key: Vec<u64> = gens.into_iter().flatten().filter(|&g| g <= su).collect();
        if key.is_empty() {
            return Ok(BigInt::zero());
        }
        let g = key.iter().fold(0u64, |a, &b| a.gcd(&b));
        if !su.is_multiple_of(g) {
            return Ok(BigInt::zero());
        }
        key.iter_mut().for_each(|x| *x /= g);
        key.sort_unstable();
        let target = (su / g) as usize;
        if key.len() == 1 {
            return Ok(BigInt::from(u8::from(target.is_multiple_of(key[0] as usize))));
        }
        if key[0] == 1 && key.iter().all(|&x| x == 1) {
            return Ok(count_scalar_units(target as i64, key.len() as u32));
        }
        if self.cells > Self::MAX_CELLS {
            self.tables.clear();
            self.cells = 0;
        }
        let entry = self
            .tables
            .entry(key)
            .or_insert_with_key(|k| Layers::new(k.iter().map(|&x| x as usize).collect()));
        self.cells += entry.extend_to(target);
        Ok(entry.get(target).clone())
    }
}

/// A scalar partition leaf together with the sign and guards it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarLeaf {
    pub argument: LinearForm,
    pub generators: ScalarGeneratorSet,
    pub sign: i8,
    pub pending_heavisides: Vec<LinearForm>,
}

impl ScalarLeaf {
    pub fn new(argument: LinearForm, generators: ScalarGeneratorSet) -> Self {
        ScalarLeaf { argument, generators, sign: 1, pending_heavisides: Vec::new() }
    }

    /// The leaf as a formula node; a guard term wraps it only when needed.
    pub fn into_formula(self) -> FormulaNode {
        let leaf = FormulaNode::scalar(self.argument, self.generators);
        let mut guards = GuardSet::with_sign(self.sign);
        for h in self.pending_heavisides {
            guards.push_heaviside(h);
        }
        if guards.is_trivial() {
            leaf
        } else {
            FormulaNode::guarded(guards, leaf)
        }
    }
}

/// Rewrites `W(L, d)` with `K` negative generators as
/// `(−1)^K · H(L') · W(L', |d|)` where `L' = L + Σ_{d_i<0} d_i`.
///
/// This is the expansion of `1/(1 − t^{−a}) = −t^a/(1 − t^a)` applied to
/// each negative generator.
pub fn normalize_negative_generators(leaf: ScalarLeaf) -> Result<ScalarLeaf> {
    let gens = leaf.generators.generators();
    if gens.iter().any(Zero::is_zero) {
        return Err(Error::ZeroGenerator);
    }
    let negatives: Vec<&BigInt> = gens.iter().filter(|g| g.is_negative()).collect();
    if negatives.is_empty() {
        return Ok(leaf);
    }
    let shift: BigInt = negatives.iter().copied().sum();
    let sign = if negatives.len().is_multiple_of(2) { leaf.sign } else { -leaf.sign };
    let argument = leaf.argument.add_constant(&shift);
    let generators = ScalarGeneratorSet::new(gens.iter().map(|g| g.abs()).collect())?;
    let mut pending_heavisides = leaf.pending_heavisides;
    pending_heavisides.push(argument.clone());
    Ok(ScalarLeaf { argument, generators, sign, pending_heavisides })
}
