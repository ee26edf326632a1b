//! Fully positive coefficients and the smallest stable power `k₀`.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use num_traits::Signed;
use serde::Serialize;

use crate::laurent::{format_rational, ExponentVector, LaurentPolynomial};
use crate::polytope::{newton_polytope, PolytopeError};

/// Default cap on the number of terms of a computed power.
pub const TERM_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub m: ExponentVector,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullPositivity {
    pub fully_positive: bool,
    pub lattice_points: usize,
    pub failure_count: usize,
    /// First failing lattice point by total degree, then descending lex.
    pub first_failure: Option<Failure>,
}

fn graded_key(m: &ExponentVector) -> (i64, Reverse<ExponentVector>) {
    (m.0.iter().sum(), Reverse(m.clone()))
}

/// `c_m > 0` at every lattice point of `poly`; missing points fail.
pub(crate) fn fully_positive_on(p: &LaurentPolynomial, points: &BTreeSet<ExponentVector>) -> FullPositivity {
    let mut failures: Vec<(ExponentVector, num_rational::BigRational)> = points
        .iter()
        .filter_map(|m| {
            let c = p.coefficient(m);
            (!c.is_positive()).then(|| (m.clone(), c))
        })
        .collect();
    failures.sort_by_key(|(m, _)| graded_key(m));
    FullPositivity {
        fully_positive: failures.is_empty(),
        lattice_points: points.len(),
        failure_count: failures.len(),
        first_failure: failures.first().map(|(m, c)| Failure { m: m.clone(), coefficient: format_rational(c) }),
    }
}

pub fn is_fully_positive(p: &LaurentPolynomial) -> Result<FullPositivity, PolytopeError> {
    let poly = newton_polytope(p)?;
    Ok(fully_positive_on(p, &poly.lattice_points()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum K0Outcome {
    FoundAt(u32),
    NoneUpTo(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct K0Search {
    pub outcome: K0Outcome,
    pub kmax: u32,
    /// `bitmap[k-1]` tells whether `p^k` is fully positive.
    pub bitmap: Vec<bool>,
    pub witnesses: Vec<Option<Failure>>,
    /// Powers `k` that pass while `k + 1` fails.
    pub non_monotone: Vec<u32>,
    /// First power not computed because it would exceed the term budget.
    pub budget_exceeded_at: Option<u32>,
}

/// Tests `p, p², …, p^kmax` incrementally. `budget` caps the term count of
/// a power; past it the bitmap is partial.
pub fn find_k0(p: &LaurentPolynomial, kmax: u32, budget: usize) -> Result<K0Search, PolytopeError> {
    let base = newton_polytope(p)?;
    let mut bitmap = Vec::new();
    let mut witnesses = Vec::new();
    let mut budget_exceeded_at = None;
    let mut power = LaurentPolynomial::one(p.nvars());
    for k in 1..=kmax.max(1) {
        // The support of p^k lies among the lattice points of kΦ.
        let points = base.dilate(i64::from(k))?.lattice_points();
        if points.len() > budget {
            budget_exceeded_at = Some(k);
            break;
        }
        power = &power * p;
        let fp = fully_positive_on(&power, &points);
        bitmap.push(fp.fully_positive);
        witnesses.push(fp.first_failure);
    }
    let computed = bitmap.len() as u32;
    let outcome = match budget_exceeded_at {
        Some(_) => K0Outcome::NoneUpTo(computed),
        None => match bitmap.iter().rposition(|&b| !b) {
            None => K0Outcome::FoundAt(1),
            Some(i) if (i as u32) + 1 < computed => K0Outcome::FoundAt(i as u32 + 2),
            Some(_) => K0Outcome::NoneUpTo(computed),
        },
    };
    let non_monotone = (1..computed).filter(|&k| bitmap[k as usize - 1] && !bitmap[k as usize]).collect();
    Ok(K0Search { outcome, kmax, bitmap, witnesses, non_monotone, budget_exceeded_at })
}
