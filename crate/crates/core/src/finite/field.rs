//! Prime-field arithmetic over `Z/lZ`.

use std::fmt;

use crate::error::{LabError, Result};

/// Largest prime accepted by plane construction unless overridden.
pub const DEFAULT_MAX_PRIME: u64 = 13;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A validated prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(l: u64) -> Result<Self> {
        if is_prime(l) {
            Ok(Prime(l))
        } else {
            Err(LabError::NotPrime(l))
        }
    }

    /// Like [`Prime::new`] but also enforces an upper bound.
    pub fn bounded(l: u64, max: u64) -> Result<Self> {
        let p = Prime::new(l)?;
        if l > max {
            return Err(LabError::PrimeTooLarge { value: l, max });
        }
        Ok(p)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduce an integer (possibly negative) into `[0, l)`.
    pub fn reduce(self, v: i64) -> u64 {
        v.rem_euclid(self.0 as i64) as u64
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of the prime field `F_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: Prime,
}

impl FieldElement {
    pub fn new(value: i64, modulus: Prime) -> Self {
        FieldElement {
            value: modulus.reduce(value),
            modulus,
        }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(LabError::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        Ok(())
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.raw((self.value + other.value) % self.modulus.get()))
    }

    pub fn checked_sub(self, other: Self) -> Result<Self> {
        self.check(other)?;
        let l = self.modulus.get();
        Ok(self.raw((self.value + l - other.value) % l))
    }

    pub fn checked_mul(self, other: Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.raw((self.value * other.value) % self.modulus.get()))
    }

    pub fn negate(self) -> Self {
        let l = self.modulus.get();
        self.raw((l - self.value) % l)
    }

    /// Multiplicative inverse by Fermat's little theorem; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(self.raw(pow_mod(
            self.value,
            self.modulus.get() - 2,
            self.modulus.get(),
        )))
    }

    fn raw(self, value: u64) -> Self {
        FieldElement {
            value,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo a prime.
pub fn inv_mod(v: u64, l: u64) -> u64 {
    debug_assert!(!v.is_multiple_of(l));
    pow_mod(v, l - 2, l)
}
