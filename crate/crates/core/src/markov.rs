//! Square matrices over `ℤ₊[x]`: digraph irreducibility and aperiodicity,
//! and the Perron root of the evaluated matrix.

use num_integer::Integer;
use num_traits::Signed;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::laurent::LaurentPolynomial;
use crate::parser::{parse_with, ParseError};
use crate::sampling::{log_uniform, rng_for, Stage};

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("matrix is empty")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    NotSquare { row: usize, expected: usize, got: usize },
    #[error("entry ({row},{col}) has a negative exponent")]
    NegativeExponent { row: usize, col: usize },
    #[error("entry ({row},{col}) has a coefficient that is not a nonnegative integer")]
    BadCoefficient { row: usize, col: usize },
    #[error("entry ({row},{col}): {source}")]
    Parse { row: usize, col: usize, source: ParseError },
    #[error("matrix file: {0}")]
    Json(String),
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("point coordinates must be positive")]
    NotPositive,
    #[error("power iteration did not converge after {iterations} iterations; spectral radius lies in [{lower}, {upper}]")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },
    #[error("polynomial has {got} variables, matrix has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `d × d` matrix of polynomials with nonnegative exponents and
/// nonnegative integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    nvars: usize,
    entries: Vec<Vec<LaurentPolynomial>>,
}

impl PolyMatrix {
    pub fn new(entries: Vec<Vec<LaurentPolynomial>>) -> Result<Self, MarkovError> {
        let d = entries.len();
        if d == 0 {
            return Err(MarkovError::Empty);
        }
        let nvars = entries[0].first().map_or(0, |p| p.nvars());
        for (row, r) in entries.iter().enumerate() {
            if r.len() != d {
                return Err(MarkovError::NotSquare { row, expected: d, got: r.len() });
            }
            for (col, p) in r.iter().enumerate() {
                if p.nvars() != nvars {
                    return Err(MarkovError::DimensionMismatch { expected: nvars, got: p.nvars() });
                }
                if !p.has_nonnegative_exponents() {
                    return Err(MarkovError::NegativeExponent { row, col });
                }
                if p.terms().any(|(_, c)| !c.is_integer() || c.is_negative()) {
                    return Err(MarkovError::BadCoefficient { row, col });
                }
            }
        }
        Ok(PolyMatrix { nvars, entries })
    }

    /// Parses a matrix of expression strings in the given variables.
    pub fn parse(entries: &[Vec<String>], vars: &[&str]) -> Result<Self, MarkovError> {
        let mut out = Vec::with_capacity(entries.len());
        for (row, r) in entries.iter().enumerate() {
            let mut parsed = Vec::with_capacity(r.len());
            for (col, text) in r.iter().enumerate() {
                parsed.push(parse_with(text, vars).map_err(|source| MarkovError::Parse { row, col, source })?);
            }
            out.push(parsed);
        }
        PolyMatrix::new(out)
    }

    /// Parses a JSON 2-D array of expression strings.
    pub fn from_json(text: &str, vars: &[&str]) -> Result<Self, MarkovError> {
        let grid: Vec<Vec<String>> = serde_json::from_str(text).map_err(|e| MarkovError::Json(e.to_string()))?;
        PolyMatrix::parse(&grid, vars)
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPolynomial {
        &self.entries[i][j]
    }

    /// Edge `i → j` iff the entry is a nonzero polynomial.
    pub fn digraph(&self) -> Vec<Vec<usize>> {
        self.entries
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(j, _)| j).collect())
            .collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, MarkovError> {
        if x.len() != self.nvars {
            return Err(MarkovError::PointLength { expected: self.nvars, got: x.len() });
        }
        if x.iter().any(|&v| !(v > 0.0)) {
            return Err(MarkovError::NotPositive);
        }
        Ok(self
            .entries
            .iter()
            .map(|r| r.iter().map(|p| p.eval_f64(x).expect("nonnegative exponents")).collect())
            .collect())
    }
}

fn reach(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Strong connectivity of the digraph of nonzero entries.
pub fn is_irreducible(a: &PolyMatrix) -> bool {
    let adj = a.digraph();
    let d = adj.len();
    if d == 1 {
        return !adj[0].is_empty();
    }
    let mut rev = vec![Vec::new(); d];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            rev[v].push(u);
        }
    }
    reach(&adj, 0).iter().all(|&b| b) && reach(&rev, 0).iter().all(|&b| b)
}

/// Period of the digraph at vertex 0 is one: the gcd of
/// `level(u) + 1 − level(v)` over edges reachable from vertex 0.
pub fn is_aperiodic(a: &PolyMatrix) -> bool {
    let adj = a.digraph();
    let mut level = vec![None; adj.len()];
    level[0] = Some(0i64);
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut g = 0i64;
    while let Some(u) = queue.pop_front() {
        let lu = level[u].expect("visited");
        for &v in &adj[u] {
            match level[v] {
                None => {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
                Some(lv) => g = g.gcd(&(lu + 1 - lv)),
            }
        }
    }
    g == 1
}

fn gershgorin(m: &[Vec<f64>]) -> (f64, f64) {
    let sums: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    (sums.iter().copied().fold(f64::INFINITY, f64::min), sums.iter().copied().fold(0.0, f64::max))
}

/// Perron root of a nonnegative matrix by power iteration on `M + cI`,
/// which is primitive when `M` is irreducible. Stops when the
/// Collatz–Wielandt bounds agree to `POWER_TOL` relative.
pub fn perron_root(m: &[Vec<f64>]) -> Result<f64, MarkovError> {
    let d = m.len();
    let (lower, upper) = gershgorin(m);
    if upper == 0.0 {
        return Ok(0.0);
    }
    if d == 1 {
        return Ok(m[0][0]);
    }
    let c = upper / 2.0;
    let mut v = vec![1.0 / d as f64; d];
    for it in 0..POWER_MAX_ITER {
        let w: Vec<f64> = (0..d).map(|i| c * v[i] + (0..d).map(|j| m[i][j] * v[j]).sum::<f64>()).collect();
        let ratios = (0..d).filter(|&i| v[i] > 0.0).map(|i| w[i] / v[i]);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
        if hi - lo <= POWER_TOL * hi {
            return Ok((lo + hi) / 2.0 - c);
        }
        let norm: f64 = w.iter().sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(MarkovError::NoConvergence { iterations: it, lower, upper });
        }
        v = w.iter().map(|x| x / norm).collect();
    }
    Err(MarkovError::NoConvergence { iterations: POWER_MAX_ITER, lower, upper })
}

/// `β_A(x)`, the spectral radius of `A(x)` for positive `x`.
pub fn spectral_radius_at(a: &PolyMatrix, x: &[f64]) -> Result<f64, MarkovError> {
    perron_root(&a.evaluate(x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BetaStatus {
    /// Equal within tolerance at every sampled point.
    Supported,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaMismatch {
    pub point: Vec<f64>,
    pub beta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaVerdict {
    pub status: BetaStatus,
    pub points: usize,
    pub max_relative_error: f64,
    pub mismatch: Option<BetaMismatch>,
}

/// Compares `β_A` with `p` at each point; relative tolerance `tol`.
pub fn verify_beta_equals(
    a: &PolyMatrix,
    p: &LaurentPolynomial,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<BetaVerdict, MarkovError> {
    if p.nvars() != a.nvars() {
        return Err(MarkovError::DimensionMismatch { expected: a.nvars(), got: p.nvars() });
    }
    let mut worst = 0.0f64;
    let mut mismatch = None;
    for x in points {
        let beta = spectral_radius_at(a, x)?;
        let value = p.eval_f64(x).map_err(|_| MarkovError::NotPositive)?;
        let err = (beta - value).abs() / value.abs().max(1.0);
        worst = worst.max(err);
        if err > tol && mismatch.is_none() {
            mismatch = Some(BetaMismatch { point: x.clone(), beta, value });
        }
    }
    Ok(BetaVerdict {
        status: if mismatch.is_some() { BetaStatus::Refuted } else { BetaStatus::Supported },
        points: points.len(),
        max_relative_error: worst,
        mismatch,
    })
}

/// Log-uniform positive points in `[1/10, 10]^n`.
pub fn sample_points(nvars: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, Stage::Markov, 0);
    (0..count).map(|_| (0..nvars).map(|_| log_uniform(&mut rng, 0.1, 10.0)).collect()).collect()
}

/// Random nonnegative integer matrix for tests and benchmarks.
pub fn random_digraph_matrix<R: Rng>(rng: &mut R, d: usize, density: f64) -> Vec<Vec<u32>> {
    (0..d).map(|_| (0..d).map(|_| if rng.gen_bool(density) { rng.gen_range(1..4) } else { 0 }).collect()).collect()
}
