//! Arithmetic in a prime field `F_q`.
//!
//! Elements carry their modulus so that mixing fields is caught: the
//! `checked_*` methods report [`Error::FieldMismatch`], while the operator
//! impls panic on mismatch the same way integer overflow would in debug
//! builds. Values are always stored fully reduced.

mod matrix;
mod prime;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::Matrix;
pub use prime::is_prime;

/// The Mersenne prime `2^31 - 1`.
pub const DEFAULT_MODULUS: u64 = (1 << 31) - 1;

const MAX_MODULUS: u64 = 1 << 62;

/// A prime modulus, validated at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldConfig {
    q: u64,
}

impl FieldConfig {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&q) {
            return Err(Error::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Self { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Reduces `value` into the field.
    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            q: self.q,
        }
    }

    pub fn from_i64(&self, value: i64) -> FieldElement {
        let r = value.rem_euclid(self.q as i64) as u64;
        FieldElement { value: r, q: self.q }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, q: self.q }
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    pub fn zeros(&self, len: usize) -> Vec<FieldElement> {
        vec![self.zero(); len]
    }

    pub fn elems(&self, values: &[u64]) -> Vec<FieldElement> {
        values.iter().map(|&v| self.elem(v)).collect()
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: rng.gen_range(0..self.q),
            q: self.q,
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: rng.gen_range(1..self.q),
            q: self.q,
        }
    }

    pub fn random_vec<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<FieldElement> {
        (0..len).map(|_| self.random(rng)).collect()
    }
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { q: DEFAULT_MODULUS }
    }
}

impl TryFrom<u64> for FieldConfig {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<FieldConfig> for u64 {
    fn from(f: FieldConfig) -> u64 {
        f.q
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> FieldConfig {
        FieldConfig { q: self.q }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                left: self.q,
                right: other.q,
            })
        }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let s = self.value + rhs.value;
        let value = if s >= self.q { s - self.q } else { s };
        Ok(Self { value, q: self.q })
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let value = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + self.q - rhs.value
        };
        Ok(Self { value, q: self.q })
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let value = (self.value as u128 * rhs.value as u128 % self.q as u128) as u64;
        Ok(Self { value, q: self.q })
    }

    /// Square-and-multiply; `0^0` is taken to be 1.
    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = self.field().one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.q - 2))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        Ok(self * rhs.inv()?)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait for FieldElement {
            type Output = FieldElement;

            #[inline]
            fn $method(self, rhs: Self) -> Self {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }

        impl $assign_trait for FieldElement {
            #[inline]
            fn $assign(&mut self, rhs: Self) {
                *self = $trait::$method(*self, rhs);
            }
        }
    };
}

binop!(Add, add, checked_add, AddAssign, add_assign);
binop!(Sub, sub, checked_sub, SubAssign, sub_assign);
binop!(Mul, mul, checked_mul, MulAssign, mul_assign);

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> Self {
        self.field().zero() - self
    }
}

/// `acc += c * x`, componentwise.
pub fn axpy(acc: &mut [FieldElement], c: FieldElement, x: &[FieldElement]) {
    debug_assert_eq!(acc.len(), x.len());
    if c.is_zero() {
        return;
    }
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += c * v;
    }
}

pub fn dot(a: &[FieldElement], b: &[FieldElement]) -> Result<FieldElement> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("dot of lengths {} and {}", a.len(), b.len())));
    }
    let first = a.first().or(b.first()).ok_or_else(|| Error::Shape("empty dot product".into()))?;
    Ok(a.iter().zip(b).fold(first.field().zero(), |acc, (&x, &y)| acc + x * y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> FieldConfig {
        FieldConfig::new(q).unwrap()
    }

    #[test]
    fn add_examples() {
        let f97 = f(97);
        assert_eq!((f97.elem(94) + f97.elem(4)).value(), 1);
        assert_eq!((f97.zero() + f97.elem(17)).value(), 17);
        let f7 = f(7);
        assert_eq!((f7.elem(3) + f7.elem(4)).value(), 0);
    }

    #[test]
    fn mul_examples() {
        let f97 = f(97);
        assert_eq!((f97.elem(94) * f97.elem(3)).value(), 88);
        for x in 0..97 {
            assert_eq!(f97.one() * f97.elem(x), f97.elem(x));
        }
        let f7 = f(7);
        assert_eq!((f7.elem(3) * f7.elem(5)).value(), 1);
    }

    #[test]
    fn inv_examples() {
        assert_eq!(f(7).elem(3).inv().unwrap().value(), 5);
        assert_eq!(f(97).elem(1).inv().unwrap().value(), 1);
        assert_eq!(f(97).elem(96).inv().unwrap().value(), 96);
        assert!(matches!(f(97).zero().inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn pow_examples() {
        let f7 = f(7);
        assert_eq!(f7.elem(3).pow(6).value(), 1);
        assert_eq!(f7.elem(3).pow(0).value(), 1);
        assert_eq!(f7.zero().pow(0).value(), 1);
        assert_eq!(f(97).elem(2).pow(10).value(), 54);
    }

    #[test]
    fn inverse_exhaustive_small_fields() {
        for q in [2u64, 3, 5, 7, 11, 13, 97, 101] {
            let fq = f(q);
            for a in 1..q {
                let a = fq.elem(a);
                assert_eq!(a * a.inv().unwrap(), fq.one(), "q={q} a={a}");
            }
        }
    }

    #[test]
    fn mismatched_fields_rejected() {
        let a = f(7).elem(3);
        let b = f(97).elem(3);
        assert!(matches!(a.checked_add(b), Err(Error::FieldMismatch { left: 7, right: 97 })));
        assert!(matches!(a.checked_mul(b), Err(Error::FieldMismatch { .. })));
        assert!(matches!(a.checked_sub(b), Err(Error::FieldMismatch { .. })));
    }

    #[test]
    #[should_panic(expected = "different fields")]
    fn operator_panics_on_mismatch() {
        let _ = f(7).elem(3) + f(11).elem(3);
    }

    #[test]
    fn rejects_composites_and_out_of_range() {
        assert!(matches!(FieldConfig::new(91), Err(Error::NotPrime(91))));
        assert!(matches!(FieldConfig::new(1), Err(Error::ModulusOutOfRange(1))));
        assert!(FieldConfig::new((1u64 << 61) - 1).is_ok());
        assert_eq!(FieldConfig::default().modulus(), DEFAULT_MODULUS);
    }

    #[test]
    fn negative_literals_reduce() {
        assert_eq!(f(97).from_i64(-3).value(), 94);
        assert_eq!((-f(97).elem(3)).value(), 94);
        assert_eq!((-f(97).zero()).value(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn field_axioms(a in 0u64..DEFAULT_MODULUS, b in 0u64..DEFAULT_MODULUS, c in 0u64..DEFAULT_MODULUS) {
            let fq = FieldConfig::default();
            let (a, b, c) = (fq.elem(a), fq.elem(b), fq.elem(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!((a + b) - b, a);
            if !b.is_zero() {
                prop_assert_eq!(a * b * b.inv().unwrap(), a);
            }
        }
    }
}
