//! One elimination step: removing the last row of an augmented matrix.
//!
//! Every numeric column contributes a term.  Columns whose entries are
//! coprime (P) give a single reduced matrix built from 2×2 determinants;
//! columns with a common factor (NP, and the degenerate Z case) give a
//! weighted sum over residue classes; columns with a zero last entry
//! contribute nothing.  [`normalize_matrix`] prepares each reduced matrix for
//! the next step.

use crate::error::{Error, Result};
use crate::model::{AugmentedMatrix, Congruence, IntColumn, LinearForm, RowDivisor};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Column categories for the last-row elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnTag {
    P,
    NP,
    Z,
    ZeroTail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnClass {
    pub tag: ColumnTag,
    /// gcd of all entries of the column.
    pub g: BigInt,
    pub last_entry: BigInt,
}

/// Classifies column `i` of a normalized matrix with at least two rows.
pub fn classify_column(matrix: &AugmentedMatrix, i: usize) -> Result<ColumnClass> {
    if matrix.rows() < 2 {
        return Err(Error::DimensionMismatch("classification needs at least two rows".into()));
    }
    let col = matrix.column(i);
    let last = col.last().clone();
    let g = col.gcd();
    if last.is_negative() {
        return Err(Error::ColumnClass {
            column: i,
            reason: format!("negative last entry {last}; normalize the matrix first"),
        });
    }
    let tag = if last.is_zero() {
        ColumnTag::ZeroTail
    } else if g.is_one() {
        ColumnTag::P
    } else if col.entries()[..col.len() - 1].iter().all(Zero::is_zero) {
        ColumnTag::Z
    } else {
        ColumnTag::NP
    };
    Ok(ColumnClass { tag, g, last_entry: last })
}

/// Numeric columns `c·ĉ_j − c_jn·ĉ_i` for every `j ≠ i`, each divided by `g`.
fn reduced_columns(matrix: &AugmentedMatrix, i: usize, g: &BigInt) -> Vec<IntColumn> {
    let ci = matrix.column(i);
    let c = ci.last();
    let n = matrix.rows();
    matrix
        .columns()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, cj)| {
            let cjn = cj.last();
            IntColumn::new((0..n - 1).map(|k| (c * cj.get(k) - cjn * ci.get(k)) / g).collect())
        })
        .collect()
}

/// The compact contribution of a P-column: symbolic column
/// `c·Ŝ − S_n·ĉ_i` and numeric columns `c·ĉ_j − c_jn·ĉ_i` for `j ≠ i`.
///
/// The result holds under the standing guard `H(S_n)` on the last symbolic
/// entry, which normalization of the input emits.
pub fn compact_contribution(matrix: &AugmentedMatrix, i: usize) -> Result<AugmentedMatrix> {
    let class = classify_column(matrix, i)?;
    if class.tag != ColumnTag::P {
        return Err(Error::ColumnClass {
            column: i,
            reason: format!("compact form needs a P-column, found {:?}", class.tag),
        });
    }
    if matrix.cols() < 2 {
        return Err(Error::ColumnClass { column: i, reason: "no other column remains".into() });
    }
    let n = matrix.rows();
    let ci = matrix.column(i);
    let c = ci.last();
    let sn = &matrix.symbolic()[n - 1];
    let symbolic = (0..n - 1)
        .map(|k| matrix.symbolic()[k].scale(c).combine(sn, &-ci.get(k)))
        .collect();
    AugmentedMatrix::new(symbolic, reduced_columns(matrix, i, &BigInt::one()), matrix.symbol_count())
}

/// Coefficients `a_j` of the expanded numerator for eliminating column `i`.
///
/// Keys are exponent vectors `(ĵ, j_n)` with `0 ≤ j_n < c`; each stored
/// coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumeratorTable {
    /// The last entry `c` of the eliminated column.
    pub modulus: i64,
    /// Number of factors multiplied (one per remaining column).
    pub factors: usize,
    pub coefficients: BTreeMap<Vec<i64>, BigInt>,
    /// Componentwise minimum over all keys.
    pub lower: Vec<i64>,
    /// Componentwise maximum over all keys.
    pub upper: Vec<i64>,
}

impl NumeratorTable {
    /// Sum of all coefficients.
    pub fn mass(&self) -> BigInt {
        self.coefficients.values().sum()
    }

    /// The mass every table must have: `c^factors`.
    pub fn expected_mass(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.modulus), self.factors)
    }
}

fn to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::Overflow(format!("matrix entry {v}")))
}

/// Expands `Π_{j≠i} Σ_{k<c} t^{k·c_j}` with every last-row exponent reduced
/// modulo `c = c_in` and the quotient `q` carried as `−q·ĉ_i` into the
/// remaining exponents.  Carries are additive, so reducing after each
/// factor gives the same table as reducing once at the end.
pub fn expand_numerator(matrix: &AugmentedMatrix, i: usize) -> Result<NumeratorTable> {
    let n = matrix.rows();
    let ci = matrix.column(i);
    let c = to_i64(ci.last())?;
    if c < 1 {
        return Err(Error::ColumnClass { column: i, reason: format!("last entry {c} is not positive") });
    }
    let chat: Vec<i64> = ci.entries()[..n - 1].iter().map(to_i64).collect::<Result<_>>()?;
    let mut table: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
    table.insert(vec![0; n], BigInt::one());
    let overflow = || Error::Overflow("numerator exponent".into());
    let mut factors = 0;
    for (j, cj) in matrix.columns().iter().enumerate() {
        if j == i {
            continue;
        }
        factors += 1;
        if c == 1 {
            continue;
        }
        let step: Vec<i64> = cj.entries().iter().map(to_i64).collect::<Result<_>>()?;
        let mut next: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
        for (key, a) in &table {
            let mut e = key.clone();
            for k in 0..c {
                if k > 0 {
                    for (x, d) in e.iter_mut().zip(&step) {
                        *x = x.checked_add(*d).ok_or_else(overflow)?;
                    }
                }
                let mut reduced = e.clone();
                let q = reduced[n - 1].div_euclid(c);
                if q != 0 {
                    reduced[n - 1] -= q * c;
                    for (x, h) in reduced.iter_mut().zip(&chat) {
                        *x = h.checked_mul(q).and_then(|t| x.checked_sub(t)).ok_or_else(overflow)?;
                    }
                }
                *next.entry(reduced).or_default() += a;
            }
        }
        next.retain(|_, a| !a.is_zero());
        table = next;
    }
    let mut lower = vec![i64::MAX; n];
    let mut upper = vec![i64::MIN; n];
    for key in table.keys() {
        for (r, &x) in key.iter().enumerate() {
            lower[r] = lower[r].min(x);
            upper[r] = upper[r].max(x);
        }
    }
    let out = NumeratorTable { modulus: c, factors, coefficients: table, lower, upper };
    if out.mass() != out.expected_mass() {
        return Err(Error::ColumnClass {
            column: i,
            reason: format!("numerator mass {} differs from {}", out.mass(), out.expected_mass()),
        });
    }
    Ok(out)
}

/// One summand of an expanded contribution: `coeff · [congruences] · W(matrix)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedItem {
    pub coeff: BigInt,
    pub congruences: Vec<Congruence>,
    /// The reduced partition, not yet normalized.
    pub matrix: AugmentedMatrix,
}

/// All summands sharing the residue `j_n` of the last symbolic entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueClass {
    pub residue: i64,
    /// `S_n ≡ residue (mod c)`; absent when `c = 1`.
    pub congruence: Option<Congruence>,
    pub items: Vec<ExpandedItem>,
}

/// The expanded (general) contribution of column `i`, grouped by residue.
///
/// Each summand carries the weight `a_j`, congruences `S_k ≡ ĵ_k (mod g)`
/// on the first `n−1` symbolic entries, and the payload
/// `W((Ŝ − ĵ − ((S_n − j_n)/c)·ĉ_i)/g, D_i/g)`.
pub fn expanded_contribution(
    matrix: &AugmentedMatrix,
    i: usize,
    table: &NumeratorTable,
) -> Result<Vec<ResidueClass>> {
    let class = classify_column(matrix, i)?;
    if class.tag == ColumnTag::ZeroTail {
        return Err(Error::ColumnClass { column: i, reason: "zero last entry".into() });
    }
    let n = matrix.rows();
    let g = class.g.clone();
    let c = class.last_entry.clone();
    let ci = matrix.column(i);
    let sn = &matrix.symbolic()[n - 1];
    let columns = reduced_columns(matrix, i, &g);
    let mut classes: BTreeMap<i64, ResidueClass> = BTreeMap::new();
    for (key, a) in &table.coefficients {
        let jn = key[n - 1];
        let class = classes.entry(jn).or_insert_with(|| ResidueClass {
            residue: jn,
            congruence: (c > BigInt::one()).then(|| Congruence::new(sn.clone(), c.clone(), jn.into())),
            items: Vec::new(),
        });
        // (S_n − j_n)/c, exact on the live branch.
        let quotient = sn.add_constant(&BigInt::from(-jn)).div(&c);
        let mut congruences = Vec::new();
        let mut symbolic = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let sk = &matrix.symbolic()[k];
            let jk = BigInt::from(key[k]);
            if g > BigInt::one() {
                congruences.push(Congruence::new(sk.clone(), g.clone(), jk.clone()));
            }
            let x = sk.add_constant(&-jk).combine(&quotient, &-ci.get(k));
            symbolic.push(x.div(&g));
        }
        let payload = AugmentedMatrix::new(symbolic, columns.clone(), matrix.symbol_count())?;
        class.items.push(ExpandedItem { coeff: a.clone(), congruences, matrix: payload });
    }
    let classes: Vec<ResidueClass> = classes.into_values().collect();
    Ok(classes)
}

/// A column with a zero last entry contributes nothing to the elimination.
pub fn zero_tail_contribution(matrix: &AugmentedMatrix, i: usize) -> Result<BigInt> {
    let col = matrix.column(i);
    if !col.last().is_zero() {
        return Err(Error::ColumnClass { column: i, reason: "last entry is not zero".into() });
    }
    if !col.is_lex_positive() {
        return Err(Error::ColumnClass { column: i, reason: "column is not lex-positive".into() });
    }
    Ok(BigInt::zero())
}

/// Result of [`normalize_matrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub sign: i8,
    /// Heaviside factors `H(form)` that multiply the partition.
    pub heavisides: Vec<LinearForm>,
    pub row_divisors: Vec<RowDivisor>,
    pub matrix: AugmentedMatrix,
}

/// Brings a freshly reduced matrix into the form the next step consumes.
///
/// 1. Rows whose numeric gcd `g > 1` divides the symbolic entry identically
///    are divided by `g`.
/// 2. Every column whose last nonzero entry is negative is flipped:
///    `1/(1−t^c) = −t^{−c}/(1−t^{−c})` negates the column, adds the original
///    column to the symbolic column and flips the sign.
/// 3. Rows with all numeric entries zero are removed; they force the
///    symbolic entry to vanish, recorded as `H(S_r)·H(−S_r)`.
/// 4. With two or more rows left, every row without negative entries gets
///    the guard `H(S_r)`.
pub fn normalize_matrix(matrix: AugmentedMatrix) -> Normalized {
    let symbol_count = matrix.symbol_count();
    let (mut symbolic, columns, _) = matrix.into_parts();
    let n = symbolic.len();
    let mut entries: Vec<Vec<BigInt>> = columns.into_iter().map(|c| c.entries().to_vec()).collect();

    let mut row_divisors = Vec::new();
    for r in 0..n {
        let g = entries.iter().fold(BigInt::zero(), |g, c| g.gcd(&c[r]));
        if g > BigInt::one() && symbolic[r].is_multiple_of(&g) {
            symbolic[r] = symbolic[r].div(&g);
            for c in &mut entries {
                c[r] /= &g;
            }
            row_divisors.push(RowDivisor { row: r, divisor: g });
        }
    }

    let mut sign = 1i8;
    for c in &mut entries {
        let lex_negative = c.iter().rev().find(|v| !v.is_zero()).is_some_and(Signed::is_negative);
        if lex_negative {
            for (s, v) in symbolic.iter_mut().zip(c.iter()) {
                *s = s.add_constant(v);
            }
            c.iter_mut().for_each(|v| *v = -&*v);
            sign = -sign;
        }
    }

    let mut heavisides = Vec::new();
    let keep: Vec<usize> = (0..n)
        .filter(|&r| {
            let zero = entries.iter().all(|c| c[r].is_zero());
            if zero {
                heavisides.push(symbolic[r].clone());
                heavisides.push(symbolic[r].neg());
            }
            !zero
        })
        .collect();
    let symbolic: Vec<LinearForm> = keep.iter().map(|&r| symbolic[r].clone()).collect();
    let columns: Vec<IntColumn> = entries
        .into_iter()
        .map(|c| IntColumn::new(keep.iter().map(|&r| c[r].clone()).collect()))
        .collect();

    if symbolic.len() >= 2 {
        for (r, s) in symbolic.iter().enumerate() {
            if columns.iter().all(|c| !c.get(r).is_negative()) {
                heavisides.push(s.clone());
            }
        }
    }
    let matrix = AugmentedMatrix::new(symbolic, columns, symbol_count).expect("normalization keeps shape");
    Normalized { sign, heavisides, row_divisors, matrix }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn col(v: &[i64]) -> IntColumn {
        IntColumn::from_i64(v)
    }

    fn form(c: i64, v: &[i64]) -> LinearForm {
        LinearForm::from_i64(c, v)
    }

    fn aug(sym: Vec<LinearForm>, cols: &[&[i64]]) -> AugmentedMatrix {
        let l = 3;
        AugmentedMatrix::new(sym, cols.iter().map(|c| col(c)).collect(), l).unwrap()
    }

    #[test]
    fn classification_examples() {
        let a = fixtures::triple();
        assert_eq!(classify_column(&a, 0).unwrap().tag, ColumnTag::P);
        let e1 = aug(vec![form(4, &[3, 0, -1]), form(-1, &[0, 3, -2])], &[&[-4, 1], &[0, 3], &[1, 8]]);
        let z = classify_column(&e1, 1).unwrap();
        assert_eq!((z.tag, z.g.clone()), (ColumnTag::Z, BigInt::from(3)));
        let e2 = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[3, 0], &[1, 1]]);
        assert_eq!(classify_column(&e2, 0).unwrap().tag, ColumnTag::ZeroTail);
        let np = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[2, 4], &[1, 1]]);
        assert_eq!(classify_column(&np, 0).unwrap().tag, ColumnTag::NP);
        let neg = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[2, -4], &[1, 1]]);
        assert!(classify_column(&neg, 0).is_err());
    }

    #[test]
    fn compact_contribution_examples() {
        let a = fixtures::triple();
        let e1 = compact_contribution(&a, 0).unwrap();
        assert_eq!(e1.symbolic(), &[form(0, &[3, 0, -1]), form(0, &[0, 3, -2])]);
        assert_eq!(e1.columns(), &[col(&[4, -1]), col(&[0, 3]), col(&[1, 8])]);
        let e2 = compact_contribution(&a, 2).unwrap();
        assert_eq!(e2.symbolic(), &[form(0, &[3, 0, -1]), form(0, &[0, 3, -3])]);
        assert_eq!(e2.columns(), &[col(&[0, -3]), col(&[4, -3]), col(&[1, 6])]);
        for i in 0..a.cols() {
            assert_eq!(compact_contribution(&a, i).unwrap().cols(), a.cols() - 1);
        }
    }

    #[test]
    fn triple_example_normalizations() {
        let a = fixtures::triple();
        let n1 = normalize_matrix(compact_contribution(&a, 0).unwrap());
        assert_eq!(n1.sign, -1);
        assert_eq!(n1.matrix.symbolic(), &[form(4, &[3, 0, -1]), form(-1, &[0, 3, -2])]);
        assert_eq!(n1.matrix.columns(), &[col(&[-4, 1]), col(&[0, 3]), col(&[1, 8])]);
        assert_eq!(n1.heavisides, vec![form(-1, &[0, 3, -2])]);

        let n2 = normalize_matrix(compact_contribution(&a, 2).unwrap());
        assert_eq!(n2.sign, 1);
        assert_eq!(n2.row_divisors, vec![RowDivisor { row: 1, divisor: 3.into() }]);
        assert_eq!(n2.matrix.symbolic(), &[form(4, &[3, 0, -1]), form(-2, &[0, 1, -1])]);
        assert_eq!(n2.matrix.columns(), &[col(&[0, 1]), col(&[-4, 1]), col(&[1, 2])]);
        assert_eq!(n2.heavisides, vec![form(-2, &[0, 1, -1])]);
    }

    #[test]
    fn normalization_is_identity_on_clean_input() {
        let m = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[1, 2], &[3, 1], &[1, 1]]);
        let n = normalize_matrix(m.clone());
        assert_eq!((n.sign, &n.matrix), (1, &m));
        assert_eq!(n.heavisides, vec![form(0, &[1]), form(0, &[0, 1])]);
        assert!(n.row_divisors.is_empty());
    }

    #[test]
    fn zero_rows_become_equalities() {
        let m = aug(vec![form(0, &[1]), form(0, &[0, 1]), form(0, &[0, 0, 1])], &[&[1, 0, 2], &[3, 0, 1]]);
        let n = normalize_matrix(m);
        assert_eq!(n.matrix.rows(), 2);
        assert!(n.heavisides.contains(&form(0, &[0, 1])) && n.heavisides.contains(&form(0, &[0, -1])));
    }

    /// Brute-force expansion: enumerate every tuple `(k_j)` with `0 ≤ k_j < c`
    /// and reduce the summed exponent once.
    fn brute_table(cols: &[Vec<i64>], i: usize) -> BTreeMap<Vec<i64>, BigInt> {
        let n = cols[0].len();
        let c = cols[i][n - 1];
        let others: Vec<&Vec<i64>> = cols.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).collect();
        let mut out: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
        let total = (c as usize).pow(others.len() as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut e = vec![0i64; n];
            for o in &others {
                let k = (rest % c as usize) as i64;
                rest /= c as usize;
                for r in 0..n {
                    e[r] += k * o[r];
                }
            }
            let q = e[n - 1].div_euclid(c);
            e[n - 1] -= q * c;
            for r in 0..n - 1 {
                e[r] -= q * cols[i][r];
            }
            *out.entry(e).or_default() += 1;
        }
        out
    }

    #[test]
    fn two_row_mass_example() {
        let m = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[1, 2], &[1, 3]]);
        let t = expand_numerator(&m, 1).unwrap();
        assert_eq!(t.mass(), BigInt::from(3));
        assert_eq!(t.coefficients, brute_table(&[vec![1, 2], vec![1, 3]], 1));
    }

    #[test]
    fn unit_last_entry_gives_trivial_table() {
        let m = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[1, 2], &[2, 1], &[3, 5]]);
        let t = expand_numerator(&m, 1).unwrap();
        assert_eq!(t.coefficients.len(), 1);
        assert_eq!(t.coefficients[&vec![0, 0]], BigInt::one());
    }

    #[test]
    fn z_column_residue_classes() {
        let a = fixtures::triple();
        let n1 = normalize_matrix(compact_contribution(&a, 0).unwrap()).matrix;
        let t = expand_numerator(&n1, 1).unwrap();
        assert_eq!(t.mass(), BigInt::from(9));
        let mut by_class: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for key in t.coefficients.keys() {
            by_class.entry(key[1]).or_default().push(key[0]);
        }
        // ĵ values of the three residue classes j_n = 0, 1, 2.
        assert_eq!(by_class[&0], vec![-6, -3, 0]);
        assert_eq!(by_class[&1], vec![-7, -4, 2]);
        assert_eq!(by_class[&2], vec![-8, -2, 1]);
    }

    #[test]
    fn incremental_reduction_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..=3);
            let p = rng.gen_range(2..=4);
            let c = rng.gen_range(1..=4);
            let mut cols: Vec<Vec<i64>> =
                (0..p).map(|_| (0..n).map(|_| rng.gen_range(-4..=4)).collect()).collect();
            cols[0][n - 1] = c;
            let sym = (0..n).map(LinearForm::symbol).collect();
            let m = AugmentedMatrix::new(sym, cols.iter().map(|v| col(v)).collect(), n).unwrap();
            let t = expand_numerator(&m, 0).unwrap();
            assert_eq!(t.coefficients, brute_table(&cols, 0), "{cols:?}");
        }
    }

    #[test]
    fn expanded_z_column_payloads() {
        let a = fixtures::triple();
        let n1 = normalize_matrix(compact_contribution(&a, 0).unwrap()).matrix;
        let t = expand_numerator(&n1, 1).unwrap();
        let classes = expanded_contribution(&n1, 1, &t).unwrap();
        assert_eq!(classes.len(), 3);
        let first = &classes[0];
        assert_eq!(first.congruence.as_ref().unwrap().form, form(-1, &[0, 3, -2]));
        // Z-column: the payload is (Ŝ − ĵ)/c with columns D/3.
        let item = &first.items[2];
        assert_eq!(item.matrix.symbolic(), &[form(4, &[3, 0, -1]).div(&BigInt::from(3))]);
        assert_eq!(item.matrix.columns(), &[col(&[-4]), col(&[1])]);
        assert_eq!(item.congruences[0].modulus, BigInt::from(3));
    }

    #[test]
    fn zero_tail_contributes_nothing() {
        let m = aug(vec![form(0, &[1]), form(0, &[0, 1])], &[&[3, 0], &[1, 1]]);
        assert_eq!(zero_tail_contribution(&m, 0).unwrap(), BigInt::zero());
        assert!(zero_tail_contribution(&m, 1).is_err());
    }
}
