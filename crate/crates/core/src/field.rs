//! Scalar abstractions: an ordered field for the LP layer, a plain field
//! for elimination, and word-size prime fields for rank certification.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field operations needed by Gaussian elimination and determinants.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
}

impl<T> Field for T where
    T: Clone
        + PartialEq
        + fmt::Debug
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
        + Zero
        + One
{
}

/// Ordered field scalar for the simplex solver. Exact types report a zero
/// tolerance; floating point uses a small epsilon for pivot decisions.
pub trait Scalar: Field + PartialOrd + Signed {
    fn from_i64(v: i64) -> Self;
    /// Pivot/comparison tolerance; zero for exact scalars.
    fn tol() -> Self;
    fn is_exact() -> bool {
        Self::tol().is_zero()
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn tol() -> Self {
        BigRational::zero()
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn tol() -> Self {
        1e-9
    }
}

/// Prime field of order `P` on a word-size prime (P < 2^32 so products fit u64
/// after reduction via u128).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Gf<const P: u64>(pub u64);

/// Two 31-bit primes used for rank certification.
pub const PRIME_A: u64 = 2_147_483_647;
pub const PRIME_B: u64 = 2_147_483_629;

impl<const P: u64> Gf<P> {
    pub fn new(v: i64) -> Self {
        let m = v.rem_euclid(P as i64) as u64;
        Gf(m)
    }
    pub fn from_u64(v: u64) -> Self {
        Gf(v % P)
    }
    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Gf::<P>(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    pub fn inv(self) -> Self {
        debug_assert!(self.0 != 0, "inverse of zero in Gf");
        self.pow(P - 2)
    }
}

impl<const P: u64> Add for Gf<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let s = self.0 + rhs.0;
        Gf(if s >= P { s - P } else { s })
    }
}

impl<const P: u64> Sub for Gf<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Gf(if self.0 >= rhs.0 {
            self.0 - rhs.0
        } else {
            self.0 + P - rhs.0
        })
    }
}

impl<const P: u64> Mul for Gf<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Gf(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Div for Gf<P> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.inv()
    }
}

impl<const P: u64> Neg for Gf<P> {
    type Output = Self;
    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            Gf(P - self.0)
        }
    }
}

impl<const P: u64> Zero for Gf<P> {
    fn zero() -> Self {
        Gf(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Gf<P> {
    fn one() -> Self {
        Gf(1)
    }
}
