//! Sparse Laurent polynomials with exact rational coefficients.
//!
//! Terms live in a `BTreeMap` keyed by exponent vector, so iteration order is
//! lexicographic and every serialization derived from it is deterministic.
//! The zero polynomial is the empty map; the variable count is carried
//! explicitly so that `0` in two variables and `0` in three are distinct.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("dimension mismatch: {left} vs {right} variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("coordinate {index} is zero but carries a negative exponent")]
    ZeroToNegativePower { index: usize },
    #[error("evaluation point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
}

/// Integer exponent vector `m`, the index of the monomial `x^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(pub Vec<i64>);

impl ExponentVector {
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

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn plus(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, k: i64) -> ExponentVector {
        ExponentVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn dot(&self, u: &[i64]) -> i64 {
        self.0.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }
}

impl From<Vec<i64>> for ExponentVector {
    fn from(v: Vec<i64>) -> Self {
        ExponentVector(v)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Scalars a Laurent polynomial can be evaluated in.
pub trait EvalScalar: Clone {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn is_zero_value(&self) -> bool;
    /// Multiplicative inverse; callers guarantee `!is_zero()`.
    fn inverse(&self) -> Self;

    fn pow_u(&self, e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one_value();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.times(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.times(&base);
            }
        }
        acc
    }
}

impl EvalScalar for BigRational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inverse(&self) -> Self {
        self.recip()
    }
}

impl EvalScalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn inverse(&self) -> Self {
        1.0 / self
    }
    fn pow_u(&self, e: u64) -> Self {
        match i32::try_from(e) {
            Ok(e) => f64::powi(*self, e),
            Err(_) => f64::powf(*self, e as f64),
        }
    }
}

impl EvalScalar for Complex64 {
    fn zero_value() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_value() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero_value(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn inverse(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }
    fn pow_u(&self, e: u64) -> Self {
        match i32::try_from(e) {
            Ok(e) => Complex64::powi(self, e),
            Err(_) => Complex64::powf(*self, e as f64),
        }
    }
}

/// `re + i·im` with rational parts, for exact evaluation at points whose
/// phases are multiples of a quarter turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussianRational { re, im: BigRational::zero() }
    }

    /// `r · i^quarter`.
    pub fn polar_quarter(r: &BigRational, quarter: u8) -> Self {
        let z = BigRational::zero();
        match quarter % 4 {
            0 => GaussianRational::new(r.clone(), z),
            1 => GaussianRational::new(z, r.clone()),
            2 => GaussianRational::new(-r, z),
            _ => GaussianRational::new(z, -r),
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn is_real_positive(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }

    /// The point of the unit circle `((1 - t²) + 2t·i) / (1 + t²)`, with
    /// phase `2·atan(t)`.
    pub fn unit_from_tan(t: &BigRational) -> Self {
        let one = BigRational::one();
        let d = &one + t * t;
        GaussianRational::new((&one - t * t) / &d, (t + t) / d)
    }

    pub fn scaled(&self, r: &BigRational) -> Self {
        GaussianRational::new(&self.re * r, &self.im * r)
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&self.re)),
            (true, false) => write!(f, "{}*i", format_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "{} {} {}*i", format_rational(&self.re), sign, format_rational(&self.im.abs()))
            }
        }
    }
}

impl EvalScalar for GaussianRational {
    fn zero_value() -> Self {
        GaussianRational::real(BigRational::zero())
    }
    fn one_value() -> Self {
        GaussianRational::real(BigRational::one())
    }
    fn from_rational(q: &BigRational) -> Self {
        GaussianRational::real(q.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn times(&self, o: &Self) -> Self {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
    fn is_zero_value(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn inverse(&self) -> Self {
        let n = self.norm_sqr();
        GaussianRational::new(&self.re / &n, -&self.im / &n)
    }
}

/// Converts a rational to the nearest-ish `f64`, falling back to a
/// numerator/denominator scaling when either part overflows.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = (nb - db - 60).max(0) as u64;
    let dshift = (db - nb - 60).max(0) as u64;
    let n = (q.numer() >> shift as usize).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> dshift as usize).to_f64().unwrap_or(f64::NAN);
    (n / d) * 2f64.powi(shift as i32 - dshift as i32)
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// `x` rounded to the nearest multiple of `2^-bits`.
pub fn dyadic_round(x: f64, bits: i32) -> BigRational {
    let scale = 2f64.powi(bits);
    let n = (x * scale).round();
    if !n.is_finite() {
        return f64_to_rational(x);
    }
    f64_to_rational(n) / f64_to_rational(scale)
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A Laurent polynomial `Σ c_m x^m` in `nvars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPolynomial {
    nvars: usize,
    terms: BTreeMap<ExponentVector, BigRational>,
}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        LaurentPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::monomial(ExponentVector::zeros(nvars), c)
    }

    pub fn monomial(m: ExponentVector, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        let nvars = m.len();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPolynomial { nvars, terms }
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(ExponentVector::unit(nvars, i), BigRational::one())
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents and dropping zeros.
    ///
    /// Panics if an exponent vector does not have length `nvars`.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, BigRational)>,
    {
        let mut map: BTreeMap<ExponentVector, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "exponent vector length");
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        LaurentPolynomial { nvars, terms: map }
    }

    /// Convenience constructor from integer exponents and integer coefficients.
    pub fn from_int_terms(nvars: usize, terms: &[(&[i64], i64)]) -> Self {
        Self::from_terms(
            nvars,
            terms.iter().map(|(m, c)| (ExponentVector(m.to_vec()), int(*c))),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigRational)> {
        self.terms.iter()
    }

    pub fn term_map(&self) -> &BTreeMap<ExponentVector, BigRational> {
        &self.terms
    }

    /// Coefficient at `m` (zero when absent).
    pub fn coefficient(&self, m: &ExponentVector) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Exponents with nonzero coefficient.
    pub fn support(&self) -> BTreeSet<ExponentVector> {
        self.terms.keys().cloned().collect()
    }

    pub fn support_points(&self) -> Vec<ExponentVector> {
        self.terms.keys().cloned().collect()
    }

    pub fn has_nonnegative_exponents(&self) -> bool {
        self.terms.keys().all(ExponentVector::is_nonnegative)
    }

    pub fn all_coefficients_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    fn check_dims(&self, other: &Self) -> Result<(), LaurentError> {
        if self.nvars != other.nvars {
            return Err(LaurentError::DimensionMismatch { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_dims(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(m);
            }
        }
        Ok(LaurentPolynomial { nvars: self.nvars, terms })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_dims(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        let integral = self.has_integer_coefficients() && other.has_integer_coefficients();
        if integral {
            // Integer convolution avoids a gcd normalization per product.
            let mut acc: HashMap<ExponentVector, BigInt> =
                HashMap::with_capacity(self.len() * other.len());
            for (m1, c1) in &self.terms {
                for (m2, c2) in &other.terms {
                    *acc.entry(m1.plus(m2)).or_insert_with(BigInt::zero) += c1.numer() * c2.numer();
                }
            }
            let terms = acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m, BigRational::from_integer(c)))
                .collect();
            return Ok(LaurentPolynomial { nvars: self.nvars, terms });
        }
        let mut acc: HashMap<ExponentVector, BigRational> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *acc.entry(m1.plus(m2)).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(LaurentPolynomial { nvars: self.nvars, terms })
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// `p^k` by iterated multiplication; `p^0 = 1`.
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Successive powers `p^1, p^2, …`, each computed from the previous one.
    pub fn powers(&self) -> Powers<'_> {
        Powers { base: self, current: Self::one(self.nvars) }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        LaurentPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    fn neg_ref(&self) -> Self {
        LaurentPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    /// Ordinary partial derivative `∂/∂x_i`.
    pub fn partial(&self, i: usize) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.0[i] != 0).map(|(m, c)| {
            let mut e = m.clone();
            e.0[i] -= 1;
            (e, c * int(m.0[i]))
        });
        Self::from_terms(self.nvars, terms)
    }

    /// Euler operator `x_i ∂/∂x_i`, which multiplies `c_m` by `m_i`.
    pub fn euler(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[i] != 0)
            .map(|(m, c)| (m.clone(), c * int(m.0[i])));
        Self::from_terms(self.nvars, terms)
    }

    /// Polynomial with every coefficient replaced by its absolute value.
    pub fn abs_coefficients(&self) -> Self {
        LaurentPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.abs())).collect(),
        }
    }

    /// Evaluates at `point`. Zero coordinates are allowed as long as no
    /// term raises them to a negative power; `0^0 = 1`.
    pub fn evaluate<T: EvalScalar>(&self, point: &[T]) -> Result<T, LaurentError> {
        if point.len() != self.nvars {
            return Err(LaurentError::PointLength { expected: self.nvars, got: point.len() });
        }
        let inverses: Vec<Option<T>> = point
            .iter()
            .map(|x| if x.is_zero_value() { None } else { Some(x.inverse()) })
            .collect();
        let mut acc = T::zero_value();
        for (m, c) in &self.terms {
            let mut term = T::from_rational(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = term.times(&point[i].pow_u(e as u64));
                } else if e < 0 {
                    match &inverses[i] {
                        Some(inv) => term = term.times(&inv.pow_u(e.unsigned_abs())),
                        None => return Err(LaurentError::ZeroToNegativePower { index: i }),
                    }
                }
            }
            acc = acc.plus(&term);
        }
        Ok(acc)
    }

    /// `f64` evaluation that treats a zero base with negative exponent as an error
    /// just like [`evaluate`](Self::evaluate); convenience wrapper.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, LaurentError> {
        self.evaluate(point)
    }

    /// Sum of coefficients, i.e. the value at the all-ones point.
    pub fn coefficient_sum(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |a, c| a + c)
    }

    /// Replaces every exponent `m` by `f(m)`; the new length is `nvars`.
    pub fn map_exponents<F>(&self, nvars: usize, f: F) -> Self
    where
        F: Fn(&ExponentVector) -> ExponentVector,
    {
        Self::from_terms(nvars, self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

pub struct Powers<'a> {
    base: &'a LaurentPolynomial,
    current: LaurentPolynomial,
}

impl Iterator for Powers<'_> {
    type Item = LaurentPolynomial;

    fn next(&mut self) -> Option<Self::Item> {
        self.current = &self.current * self.base;
        Some(self.current.clone())
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    /// Panics on dimension mismatch; use `checked_add` to get an error instead.
    fn add(self, rhs: Self) -> LaurentPolynomial {
        self.checked_add(rhs).expect("add: dimension mismatch")
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: Self) -> LaurentPolynomial {
        self.checked_sub(rhs).expect("sub: dimension mismatch")
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: Self) -> LaurentPolynomial {
        self.checked_mul(rhs).expect("mul: dimension mismatch")
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        self.neg_ref()
    }
}

impl Add for LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, rhs: Self) -> LaurentPolynomial {
        &self + &rhs
    }
}

impl Sub for LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, rhs: Self) -> LaurentPolynomial {
        &self - &rhs
    }
}

impl Mul for LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, rhs: Self) -> LaurentPolynomial {
        &self * &rhs
    }
}

impl Neg for LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        self.neg_ref()
    }
}

/// Formats a rational as `n` or `n/d`.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> LaurentPolynomial {
        LaurentPolynomial::var(n, i)
    }

    fn one(n: usize) -> LaurentPolynomial {
        LaurentPolynomial::one(n)
    }

    /// `(1+x)^4 - 7x^2` in one variable.
    fn quartic() -> LaurentPolynomial {
        let a = &one(1) + &x(1, 0);
        let sq = &a * &a;
        &(&sq * &sq) - &LaurentPolynomial::monomial(ExponentVector(vec![2]), int(7))
    }

    #[test]
    fn gaussian_evaluation() {
        let q = quartic();
        let w = GaussianRational::polar_quarter(&int(1), 2);
        assert_eq!(q.evaluate(&[w]).unwrap(), GaussianRational::real(int(-7)));
        let i = GaussianRational::polar_quarter(&int(1), 1);
        let v = LaurentPolynomial::from_int_terms(1, &[(&[0], 1), (&[2], 1)]).evaluate(&[i]).unwrap();
        assert!(v.is_zero_value());
        let u = GaussianRational::unit_from_tan(&ratio(1, 3));
        assert_eq!(u.norm_sqr(), int(1));
        assert_eq!(u.to_string(), "4/5 + 3/5*i");
        assert_eq!(dyadic_round(0.3, 2), ratio(1, 4));
    }

    fn coeffs_1d(p: &LaurentPolynomial) -> Vec<(i64, BigRational)> {
        p.terms().map(|(m, c)| (m.0[0], c.clone())).collect()
    }

    #[test]
    fn add_cancels() {
        let p = &one(1) + &x(1, 0);
        let q = &(-&one(1)) + &x(1, 0);
        let s = &p + &q;
        assert_eq!(s, LaurentPolynomial::monomial(ExponentVector(vec![1]), int(2)));
    }

    #[test]
    fn add_zero_identity() {
        let p = quartic();
        assert_eq!(&p + &LaurentPolynomial::zero(1), p);
    }

    #[test]
    fn add_restores_binomial() {
        let p = &quartic() + &LaurentPolynomial::monomial(ExponentVector(vec![2]), int(7));
        // binomial(4, k)
        let expect: Vec<(i64, BigRational)> =
            vec![(0, int(1)), (1, int(4)), (2, int(6)), (3, int(4)), (4, int(1))];
        assert_eq!(coeffs_1d(&p), expect);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let e = x(1, 0).checked_add(&x(2, 0)).unwrap_err();
        assert_eq!(e, LaurentError::DimensionMismatch { left: 1, right: 2 });
        assert!(x(1, 0).checked_mul(&x(2, 1)).is_err());
    }

    #[test]
    fn mul_examples() {
        let p = &one(1) + &x(1, 0);
        let q = &one(1) - &x(1, 0);
        let expect = &one(1) - &LaurentPolynomial::monomial(ExponentVector(vec![2]), int(1));
        assert_eq!(&p * &q, expect);

        let inv = LaurentPolynomial::monomial(ExponentVector(vec![-1]), int(1));
        assert_eq!(&inv * &x(1, 0), one(1));
    }

    #[test]
    fn quartic_expansion() {
        let expect = vec![(0, int(1)), (1, int(4)), (2, int(-1)), (3, int(4)), (4, int(1))];
        assert_eq!(coeffs_1d(&quartic()), expect);
    }

    #[test]
    fn pow_examples() {
        let p = &one(1) + &x(1, 0);
        assert_eq!(p.pow(0), one(1));
        assert_eq!(
            coeffs_1d(&p.pow(2)),
            vec![(0, int(1)), (1, int(2)), (2, int(1))]
        );
        // (x^2 - x + 1)^3 against a brute-force triple convolution of [1,-1,1].
        let base = LaurentPolynomial::from_int_terms(1, &[(&[0], 1), (&[1], -1), (&[2], 1)]);
        let c = [1i64, -1, 1];
        let mut brute = [0i64; 7];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    brute[i + j + k] += c[i] * c[j] * c[k];
                }
            }
        }
        let got = base.pow(3);
        for (e, b) in brute.iter().enumerate() {
            assert_eq!(got.coefficient(&ExponentVector(vec![e as i64])), int(*b));
        }
    }

    #[test]
    fn powers_iterator_matches_pow() {
        let p = quartic();
        for (k, pk) in p.powers().take(4).enumerate() {
            assert_eq!(pk, p.pow(k as u32 + 1));
        }
    }

    #[test]
    fn evaluate_examples() {
        let p = &one(1) + &x(1, 0);
        assert_eq!(p.evaluate(&[int(1)]).unwrap(), int(2));
        assert_eq!(quartic().evaluate(&[int(1)]).unwrap(), int(9));
        assert_eq!(quartic().evaluate(&[int(1)]).unwrap(), quartic().coefficient_sum());
        let c = quartic().evaluate(&[Complex64::new(1.0, 0.0)]).unwrap();
        assert!((c.re - 9.0).abs() < 1e-12 && c.im.abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_zero_to_negative_power() {
        let p = LaurentPolynomial::from_int_terms(2, &[(&[-1, 0], 1), (&[0, 1], 1)]);
        let err = p.evaluate(&[int(0), int(3)]).unwrap_err();
        assert_eq!(err, LaurentError::ZeroToNegativePower { index: 0 });
        assert_eq!(p.evaluate(&[int(2), int(3)]).unwrap(), ratio(7, 2));
        assert!(p.evaluate(&[int(2)]).is_err());
    }

    #[test]
    fn support_examples() {
        let p = LaurentPolynomial::from_int_terms(2, &[(&[0, 0], 1), (&[1, 1], 1)]);
        let s: Vec<_> = p.support().into_iter().collect();
        assert_eq!(s, vec![ExponentVector(vec![0, 0]), ExponentVector(vec![1, 1])]);
        assert!(LaurentPolynomial::zero(2).support().is_empty());
        let q: Vec<i64> = quartic().support().iter().map(|m| m.0[0]).collect();
        assert_eq!(q, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn derivatives() {
        // d/dx (x^-2 + 3x^3) = -2x^-3 + 9x^2
        let p = LaurentPolynomial::from_int_terms(1, &[(&[-2], 1), (&[3], 3)]);
        let d = p.partial(0);
        assert_eq!(d, LaurentPolynomial::from_int_terms(1, &[(&[-3], -2), (&[2], 9)]));
        let e = p.euler(0);
        assert_eq!(e, LaurentPolynomial::from_int_terms(1, &[(&[-2], -2), (&[3], 9)]));
    }

    #[test]
    fn rational_coefficients_multiply_exactly() {
        let p = LaurentPolynomial::from_terms(
            1,
            vec![(ExponentVector(vec![0]), ratio(1, 2)), (ExponentVector(vec![1]), ratio(1, 3))],
        );
        let sq = &p * &p;
        assert_eq!(sq.coefficient(&ExponentVector(vec![1])), ratio(1, 3));
        assert_eq!(sq.coefficient(&ExponentVector(vec![2])), ratio(1, 9));
        assert_eq!(p.denominator_lcm(), BigInt::from(6));
    }

    #[test]
    fn rational_to_f64_handles_huge_parts() {
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(398) * 4);
        assert!((rational_to_f64(&big) - 25.0).abs() < 1e-9);
        assert_eq!(rational_to_f64(&ratio(1, 4)), 0.25);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly() -> impl Strategy<Value = LaurentPolynomial> {
            prop::collection::vec(((-2i64..3, -2i64..3), (-5i64..6, 1i64..4)), 0..5).prop_map(
                |ts| {
                    LaurentPolynomial::from_terms(
                        2,
                        ts.into_iter()
                            .map(|((a, b), (n, d))| (ExponentVector(vec![a, b]), ratio(n, d))),
                    )
                },
            )
        }

        fn arb_point() -> impl Strategy<Value = Vec<BigRational>> {
            prop::collection::vec((1i64..7, 1i64..4, any::<bool>()), 2).prop_map(|v| {
                v.into_iter().map(|(n, d, s)| ratio(if s { -n } else { n }, d)).collect()
            })
        }

        proptest! {
            #[test]
            fn ring_laws(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
                prop_assert_eq!(&p + &q, &q + &p);
                prop_assert_eq!(&p * &q, &q * &p);
                prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
                prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
                prop_assert!((&p - &p).is_zero());
            }

            #[test]
            fn pow_adds_exponents(p in arb_poly(), a in 0u32..3, b in 0u32..3) {
                prop_assert_eq!(&p.pow(a) * &p.pow(b), p.pow(a + b));
            }

            #[test]
            fn product_matches_brute_convolution(p in arb_poly(), q in arb_poly()) {
                let pq = &p * &q;
                let mut brute: BTreeMap<ExponentVector, BigRational> = BTreeMap::new();
                for (m1, c1) in p.terms() {
                    for (m2, c2) in q.terms() {
                        *brute.entry(m1.plus(m2)).or_insert_with(BigRational::zero) += c1 * c2;
                    }
                }
                let sums: BTreeSet<ExponentVector> = brute.keys().cloned().collect();
                for m in pq.support() {
                    prop_assert!(sums.contains(&m));
                }
                for (m, c) in brute {
                    prop_assert_eq!(pq.coefficient(&m), c);
                }
            }

            #[test]
            fn evaluation_is_multiplicative(p in arb_poly(), q in arb_poly(), x in arb_point()) {
                let lhs = (&p * &q).evaluate(&x).unwrap();
                let rhs = p.evaluate(&x).unwrap() * q.evaluate(&x).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
