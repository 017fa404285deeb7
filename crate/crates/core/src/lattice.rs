//! Exponent vectors, supports, and sparse Laurent polynomials.

use crate::{Error, Rat, Result};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Index, Sub};

/// Integer exponent vector of a Laurent monomial; entries may be negative.
/// Lexicographic order gives canonical iteration throughout.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector(pub Vec<i64>);

impl ExponentVector {
    pub fn new(entries: Vec<i64>) -> Self {
        ExponentVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        ExponentVector(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot_rat(&self, v: &[Rat]) -> Rat {
        self.0
            .iter()
            .zip(v)
            .fold(Rat::zero(), |acc, (&e, x)| acc + x * Rat::from_integer(e.into()))
    }

    /// Evaluate the monomial x^e at a complex point (Laurent: zero base with
    /// a negative exponent yields None).
    pub fn eval(&self, x: &[Complex64]) -> Option<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        for (&e, &xi) in self.0.iter().zip(x) {
            if e < 0 && xi.norm() == 0.0 {
                return None;
            }
            v *= xi.powi(e as i32);
        }
        Some(v)
    }
}

impl fmt::Debug for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Index<usize> for ExponentVector {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl Add<&ExponentVector> for &ExponentVector {
    type Output = ExponentVector;
    fn add(self, rhs: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&ExponentVector> for &ExponentVector {
    type Output = ExponentVector;
    fn sub(self, rhs: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Finite deduplicated point set in Z^n, kept sorted for canonical order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Support {
    points: Vec<ExponentVector>,
}

impl Support {
    pub fn new(mut points: Vec<ExponentVector>) -> Self {
        points.sort();
        points.dedup();
        Support { points }
    }

    pub fn points(&self) -> &[ExponentVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn contains(&self, p: &ExponentVector) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn position(&self, p: &ExponentVector) -> Option<usize> {
        self.points.binary_search(p).ok()
    }
}

/// Coefficient domain: exact rationals, or univariate polynomials in the
/// distinguished variable x0 once a variable has been hidden.
pub trait Coefficient: Clone + PartialEq + fmt::Debug {
    fn coeff_zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
}

impl Coefficient for Rat {
    fn coeff_zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
}

/// Univariate polynomial in x0 with rational coefficients, ascending degree.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RatPoly(pub Vec<Rat>);

impl RatPoly {
    pub fn constant(c: Rat) -> Self {
        RatPoly(vec![c])
    }

    /// The monomial c * x0^k.
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = c;
        RatPoly(v)
    }

    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .rposition(|c| !Zero::is_zero(c))
            .unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.0.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeff_f64(&self, k: usize) -> f64 {
        self.0.get(k).map_or(0.0, |c| c.to_f64().unwrap_or(0.0))
    }

    pub fn eval_complex(&self, x0: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * x0 + Complex64::new(c.to_f64().unwrap_or(0.0), 0.0);
        }
        acc
    }

    pub fn eval_rat(&self, x0: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x0 + c;
        }
        acc
    }

    pub fn max_abs(&self) -> Rat {
        use num_traits::Signed;
        self.0
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn scale(&self, s: &Rat) -> RatPoly {
        RatPoly(self.0.iter().map(|c| c * s).collect())
    }
}

impl Coefficient for RatPoly {
    fn coeff_zero() -> Self {
        RatPoly(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(self.coeff(k) + other.coeff(k));
        }
        RatPoly(v)
    }
}

/// Laurent polynomial as aligned support points and nonzero coefficients.
#[derive(Clone, Debug)]
pub struct SparsePolynomial<C: Coefficient> {
    support: Support,
    coeffs: Vec<C>,
}

impl<C: Coefficient> SparsePolynomial<C> {
    /// Build from raw (exponent, coefficient) pairs: duplicates merge by
    /// summation, exact zeros are dropped, the result is canonical.
    pub fn from_terms(terms: Vec<(ExponentVector, C)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|(e, _)| e.len())
            .ok_or(Error::ZeroPolynomial)?;
        let mut sorted = terms;
        for (e, _) in &sorted {
            if e.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.len(),
                });
            }
        }
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut points: Vec<ExponentVector> = Vec::new();
        let mut coeffs: Vec<C> = Vec::new();
        for (e, c) in sorted {
            if points.last() == Some(&e) {
                let last = coeffs.last_mut().expect("aligned");
                *last = last.add(&c);
            } else {
                points.push(e);
                coeffs.push(c);
            }
        }
        let mut kept_pts = Vec::new();
        let mut kept_cfs = Vec::new();
        for (e, c) in points.into_iter().zip(coeffs) {
            if !c.is_zero() {
                kept_pts.push(e);
                kept_cfs.push(c);
            }
        }
        if kept_pts.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(SparsePolynomial {
            support: Support { points: kept_pts },
            coeffs: kept_cfs,
        })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff_at(&self, e: &ExponentVector) -> Option<&C> {
        self.support.position(e).map(|i| &self.coeffs[i])
    }

    pub fn nvars(&self) -> usize {
        self.support.ambient_dim()
    }
}

/// `support_of`: canonicalize a raw coefficient/exponent list.
pub fn support_of<C: Coefficient>(
    terms: Vec<(ExponentVector, C)>,
) -> Result<SparsePolynomial<C>> {
    SparsePolynomial::from_terms(terms)
}
