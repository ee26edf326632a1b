//! Dense univariate polynomials over ℚ and Sturm root counting.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::laurent::LaurentPolynomial;

/// Coefficients from degree 0 upward, with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dense(pub Vec<BigRational>);

impl Dense {
    /// Converts a one-variable polynomial with nonnegative exponents.
    pub fn from_laurent(p: &LaurentPolynomial) -> Option<Self> {
        if p.nvars() != 1 || !p.has_nonnegative_exponents() {
            return None;
        }
        let deg = p.terms().map(|(m, _)| m.0[0]).max().unwrap_or(0) as usize;
        let mut c = vec![BigRational::zero(); deg + 1];
        for (m, v) in p.terms() {
            c[m.0[0] as usize] = v.clone();
        }
        Some(Dense(c).trimmed())
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn at_zero(&self) -> BigRational {
        self.0.first().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn derivative(&self) -> Self {
        Dense(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer((i as i64).into()))
                .collect(),
        )
        .trimmed()
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &Dense) -> Self {
        let mut r = self.0.clone();
        let dl = d.lead();
        while r.len() >= d.0.len() && !r.is_empty() {
            let shift = r.len() - d.0.len();
            let q = r.last().expect("nonempty") / &dl;
            for (i, c) in d.0.iter().enumerate() {
                let v = &r[i + shift] - &q * c;
                r[i + shift] = v;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Dense(r).trimmed()
    }

    fn neg(&self) -> Self {
        Dense(self.0.iter().map(|c| -c).collect())
    }
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

fn sgn(q: &BigRational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots in `(0, ∞)`; requires `f(0) ≠ 0`.
pub fn positive_root_count(f: &Dense) -> Option<usize> {
    if f.is_zero() || f.at_zero().is_zero() {
        return None;
    }
    let mut seq = vec![f.clone(), f.derivative()];
    while !seq.last().expect("nonempty").is_zero() {
        let k = seq.len();
        let r = seq[k - 2].rem(&seq[k - 1]).neg();
        seq.push(r);
    }
    seq.pop();
    let at0 = sign_changes(seq.iter().map(|p| sgn(&p.at_zero())));
    let at_inf = sign_changes(seq.iter().map(|p| sgn(&p.lead())));
    Some(at0 - at_inf)
}

/// `f > 0` on `[0, ∞)`.
pub fn positive_on_half_line(f: &Dense) -> bool {
    f.at_zero().is_positive() && f.lead().is_positive() && positive_root_count(f) == Some(0)
}
