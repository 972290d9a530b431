//! Exact field arithmetic.
//!
//! [`Field`] is a context object: it owns whatever is needed to interpret an
//! element (for a prime field, the modulus) so that matrices and solvers can
//! be written once and instantiated over [`PrimeField`] or [`RationalField`].

use std::fmt::{self, Debug};
use std::hash::Hash;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic over a field whose elements are `Self::Elem`.
pub trait Field: Clone + Debug + PartialEq + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
}

/// Trial division; moduli here are desk scale.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `p >= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// The prime field F_q. Elements are canonical representatives in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q > u64::from(u32::MAX) {
            return Err(Error::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q: q as u32 })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.q
    }

    /// Reduce an arbitrary integer to its canonical representative.
    #[inline]
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(i64::from(self.q)) as u32
    }

    #[inline]
    pub fn element(&self, v: i64) -> FieldElement {
        FieldElement { value: self.reduce(v), q: self.q }
    }

    /// Inner product of two equal-length vectors.
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        debug_assert_eq!(a.len(), b.len());
        let q = u64::from(self.q);
        let mut acc = 0u64;
        for (x, y) in a.iter().zip(b) {
            acc = (acc + u64::from(*x) * u64::from(*y)) % q;
        }
        acc as u32
    }

    fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let q = u64::from(self.q);
        let mut b = u64::from(base) % q;
        let mut acc = 1u64 % q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % q;
            }
            b = b * b % q;
            exp >>= 1;
        }
        acc as u32
    }
}

impl Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        u64::from(f.q)
    }
}

impl Field for PrimeField {
    type Elem = u32;

    #[inline]
    fn zero(&self) -> u32 {
        0
    }

    #[inline]
    fn one(&self) -> u32 {
        1 % self.q
    }

    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        ((u64::from(*a) + u64::from(*b)) % u64::from(self.q)) as u32
    }

    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        ((u64::from(*a) + u64::from(self.q) - u64::from(*b)) % u64::from(self.q)) as u32
    }

    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((u64::from(*a) * u64::from(*b)) % u64::from(self.q)) as u32
    }

    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }

    fn inv(&self, a: &u32) -> Option<u32> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            // Fermat: a^(q-2) = a^-1
            Some(self.pow(*a, u64::from(self.q) - 2))
        }
    }
}

/// A single element of a prime field, carrying its modulus.
///
/// The checked operations reject operands from different fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    q: u32,
}

impl FieldElement {
    pub fn new(field: PrimeField, value: i64) -> Self {
        field.element(value)
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { q: self.q }
    }

    fn same_field(&self, other: &Self) -> Result<PrimeField> {
        if self.q != other.q {
            Err(Error::FieldMismatch(self.q, other.q))
        } else {
            Ok(self.field())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(FieldElement { value: Field::add(&f, &self.value, &other.value), q: self.q })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(FieldElement { value: Field::sub(&f, &self.value, &other.value), q: self.q })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(FieldElement { value: Field::mul(&f, &self.value, &other.value), q: self.q })
    }

    pub fn neg(&self) -> Self {
        FieldElement { value: Field::neg(&self.field(), &self.value), q: self.q }
    }

    pub fn inv(&self) -> Result<Self> {
        let value = Field::inv(&self.field(), &self.value).ok_or(Error::DivisionByZero)?;
        Ok(FieldElement { value, q: self.q })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.q)
    }
}

/// The rationals, with exact big-integer arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RationalField;

impl Field for RationalField {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}
