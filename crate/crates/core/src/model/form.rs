use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// An exact rational number with an `i128` numerator and a positive
/// denominator.  Produced when a form is evaluated at a concrete point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rat {
    pub num: i128,
    pub den: i128,
}

impl Rat {
    pub fn int(v: i128) -> Self {
        Rat { num: v, den: 1 }
    }

    pub fn is_nonneg(&self) -> bool {
        self.num >= 0
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<i128> {
        if self.den == 1 {
            Some(self.num)
        } else if self.num % self.den == 0 {
            Some(self.num / self.den)
        } else {
            None
        }
    }

    pub fn floor(&self) -> i128 {
        self.num.div_euclid(self.den)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self.as_integer() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}/{}", self.num, self.den),
        }
    }
}

/// An affine form `(const + Σ coeffs[i]·x_i) / den` over the symbol scope.
///
/// Forms are kept in lowest terms with a positive denominator and without
/// trailing zero coefficients, so structural equality is semantic equality.
/// A coefficient vector shorter than the scope means the missing
/// coefficients are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearForm {
    constant: BigInt,
    coeffs: Vec<BigInt>,
    den: BigInt,
}

impl LinearForm {
    /// An integral form.
    pub fn new(constant: BigInt, coeffs: Vec<BigInt>) -> Self {
        Self::with_denominator(constant, coeffs, BigInt::one())
    }

    /// A form with an explicit denominator; the result is reduced.
    ///
    /// # Panics
    /// If `den` is zero.
    pub fn with_denominator(constant: BigInt, coeffs: Vec<BigInt>, den: BigInt) -> Self {
        assert!(!den.is_zero(), "linear form with zero denominator");
        let mut f = LinearForm { constant, coeffs, den };
        f.normalize();
        f
    }

    pub fn from_i64(constant: i64, coeffs: &[i64]) -> Self {
        Self::new(constant.into(), coeffs.iter().map(|&c| c.into()).collect())
    }

    pub fn zero() -> Self {
        Self::new(BigInt::zero(), Vec::new())
    }

    pub fn constant(value: BigInt) -> Self {
        Self::new(value, Vec::new())
    }

    /// The form consisting of the single symbol `x_index` (0-based).
    pub fn symbol(index: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); index + 1];
        coeffs[index] = BigInt::one();
        Self::new(BigInt::zero(), coeffs)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        if self.den.is_negative() {
            self.den = -&self.den;
            self.constant = -&self.constant;
            for c in &mut self.coeffs {
                *c = -&*c;
            }
        }
        if self.den.is_one() {
            return;
        }
        let g = self.numerator_content().gcd(&self.den);
        if g.is_zero() {
            self.den = BigInt::one();
        } else if !g.is_one() {
            self.constant /= &g;
            for c in &mut self.coeffs {
                *c /= &g;
            }
            self.den /= &g;
        }
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.constant
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Coefficient of `x_index`, zero beyond the stored width.
    pub fn coeff(&self, index: usize) -> BigInt {
        self.coeffs.get(index).cloned().unwrap_or_default()
    }

    /// One past the highest symbol index with a nonzero coefficient.
    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    /// gcd of the numerator's constant and coefficients (0 for the zero form).
    pub fn numerator_content(&self) -> BigInt {
        self.coeffs.iter().fold(self.constant.abs(), |g, c| g.gcd(c))
    }

    /// True when `self` takes values in `m·Z` at every integer point.
    pub fn is_multiple_of(&self, m: &BigInt) -> bool {
        self.is_integral() && self.numerator_content().is_multiple_of(m)
    }

    pub fn neg(&self) -> Self {
        LinearForm {
            constant: -&self.constant,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &LinearForm) -> Self {
        self.combine(other, &BigInt::one())
    }

    pub fn sub(&self, other: &LinearForm) -> Self {
        self.combine(other, &-BigInt::one())
    }

    /// `self + k·other`.
    pub fn combine(&self, other: &LinearForm, k: &BigInt) -> Self {
        if k.is_zero() {
            return self.clone();
        }
        let (a, b) = if self.den == other.den {
            (BigInt::one(), BigInt::one())
        } else {
            (other.den.clone(), self.den.clone())
        };
        let den = &self.den * &a;
        let kb = k * &b;
        let width = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..width)
            .map(|i| {
                let x = self.coeffs.get(i).map(|c| c * &a).unwrap_or_default();
                let y = other.coeffs.get(i).map(|c| c * &kb).unwrap_or_default();
                x + y
            })
            .collect();
        Self::with_denominator(&self.constant * &a + &other.constant * &kb, coeffs, den)
    }

    pub fn add_constant(&self, k: &BigInt) -> Self {
        Self::with_denominator(&self.constant + k * &self.den, self.coeffs.clone(), self.den.clone())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::with_denominator(
            &self.constant * k,
            self.coeffs.iter().map(|c| c * k).collect(),
            self.den.clone(),
        )
    }

    /// `self / k` as an exact rational form.
    pub fn div(&self, k: &BigInt) -> Self {
        Self::with_denominator(self.constant.clone(), self.coeffs.clone(), &self.den * k)
    }

    /// Exact value at an integer point given as big integers.
    pub fn evaluate(&self, point: &[BigInt]) -> Result<BigInt> {
        if self.coeffs.len() > point.len() {
            return Err(Error::UnboundSymbol(point.len()));
        }
        let num = self
            .coeffs
            .iter()
            .zip(point)
            .fold(self.constant.clone(), |acc, (c, x)| acc + c * x);
        if self.den.is_one() {
            return Ok(num);
        }
        let (q, r) = num.div_rem(&self.den);
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NonIntegral(self.to_string()))
        }
    }

    /// Value at a machine-integer point.  Symbols beyond `env` are unbound.
    pub fn value_at(&self, env: &[i64]) -> Result<Rat> {
        if self.coeffs.len() > env.len() {
            return Err(Error::UnboundSymbol(env.len()));
        }
        let overflow = || Error::Overflow(format!("evaluating {self}"));
        let mut acc = self.constant.to_i128().ok_or_else(overflow)?;
        for (c, &x) in self.coeffs.iter().zip(env) {
            if c.is_zero() || x == 0 {
                continue;
            }
            let c = c.to_i128().ok_or_else(overflow)?;
            acc = c
                .checked_mul(x as i128)
                .and_then(|t| acc.checked_add(t))
                .ok_or_else(overflow)?;
        }
        let den = self.den.to_i128().ok_or_else(overflow)?;
        Ok(Rat { num: acc, den })
    }

    /// Render with caller-supplied symbol names.
    pub fn render(&self, name: &dyn Fn(usize) -> String, latex: bool) -> String {
        let mut out = String::new();
        let mut first = true;
        let mut push = |coef: &BigInt, sym: Option<String>| {
            if coef.is_zero() {
                return;
            }
            let neg = coef.is_negative();
            let mag = coef.abs();
            if first {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            first = false;
            match sym {
                Some(s) if mag.is_one() => out.push_str(&s),
                Some(s) if latex => out.push_str(&format!("{mag}{s}")),
                Some(s) => out.push_str(&format!("{mag} {s}")),
                None => out.push_str(&mag.to_string()),
            }
        };
        for (i, c) in self.coeffs.iter().enumerate() {
            push(c, Some(name(i)));
        }
        push(&self.constant, None);
        if first {
            out.push('0');
        }
        if self.den.is_one() {
            out
        } else if latex {
            format!("\\frac{{{out}}}{{{}}}", self.den)
        } else {
            format!("({out})/{}", self.den)
        }
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.render(&|i| format!("s{}", i + 1), false))
    }
}

#[derive(Serialize, Deserialize)]
struct FormDto {
    #[serde(rename = "const", with = "super::json")]
    constant: BigInt,
    #[serde(with = "super::json::vec")]
    coeffs: Vec<BigInt>,
    #[serde(
        default = "BigInt::one",
        skip_serializing_if = "BigInt::is_one",
        with = "super::json"
    )]
    den: BigInt,
}

impl Serialize for LinearForm {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        FormDto {
            constant: self.constant.clone(),
            coeffs: self.coeffs.clone(),
            den: self.den.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for LinearForm {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let dto = FormDto::deserialize(de)?;
        if dto.den.is_zero() {
            return Err(serde::de::Error::custom("linear form with zero denominator"));
        }
        Ok(LinearForm::with_denominator(dto.constant, dto.coeffs, dto.den))
    }
}

/// Free-function form of [`LinearForm::evaluate`].
pub fn evaluate_linear_form(form: &LinearForm, point: &[BigInt]) -> Result<BigInt> {
    form.evaluate(point)
}
