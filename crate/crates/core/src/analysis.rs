//! Convexity tools on chart restrictions: the matrix `J_f`, the Hessian of
//! `log f(e^t)`, lattice spans of supports, and sampled checks of positive
//! definiteness, monotonicity, log-convexity and the polarized inequality.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::homogenize::HomogenizedPolynomial;
use crate::intlin;
use crate::laurent::{f64_to_rational, rational_to_f64, LaurentPolynomial};
use crate::polytope::newton_polytope;
use crate::sampling::{log_uniform, rng_for, FloatPoly, SamplerConfig, Stage};

/// Cholesky pivots within this of zero make a verdict borderline.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("f(s) = {0} is not positive")]
    NonPositive(String),
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("point coordinates must be positive")]
    NotInterior,
    #[error("polynomial has negative exponents")]
    NegativeExponents,
    #[error("polynomial is zero")]
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JMatrix {
    pub s: Vec<f64>,
    pub entries: Vec<Vec<f64>>,
}

impl JMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[i][j] - self.entries[j][i]).abs());
            }
        }
        worst
    }
}

fn check_point(f: &LaurentPolynomial, s: &[f64]) -> Result<(), AnalysisError> {
    if s.len() != f.nvars() {
        return Err(AnalysisError::PointLength { expected: f.nvars(), got: s.len() });
    }
    if s.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(AnalysisError::NotInterior);
    }
    Ok(())
}

/// `J_f(s)_{ij} = s_j ∂_j (s_i ∂_i log f)(s) = (f·θ_iθ_j f − θ_i f·θ_j f) / f²`
/// with `θ_i = s_i ∂_i`, evaluated exactly at the rational value of `s`.
pub fn j_matrix(f: &LaurentPolynomial, s: &[f64]) -> Result<JMatrix, AnalysisError> {
    check_point(f, s)?;
    let q: Vec<BigRational> = s.iter().map(|&x| f64_to_rational(x)).collect();
    let ev = |g: &LaurentPolynomial| g.evaluate(&q).expect("interior point");
    let fv = ev(f);
    if !fv.is_positive() {
        return Err(AnalysisError::NonPositive(crate::laurent::format_rational(&fv)));
    }
    let n = f.nvars();
    let first: Vec<LaurentPolynomial> = (0..n).map(|i| f.euler(i)).collect();
    let fi: Vec<BigRational> = first.iter().map(ev).collect();
    let f2 = &fv * &fv;
    let mut entries = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let fij = ev(&first[i].euler(j));
            let v = rational_to_f64(&((&fv * &fij - &fi[i] * &fi[j]) / &f2));
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    Ok(JMatrix { s: s.to_vec(), entries })
}

/// Hessian of `log f^♯` for `f^♯(t) = Σ c_m e^{⟨m,t⟩}`: with weights
/// `w_m = c_m e^{⟨m,t⟩} / f^♯(t)` and mean `μ = Σ w_m m`, it is
/// `Σ w_m (m − μ)(m − μ)ᵀ`.
pub fn hessian_log_fsharp(f: &LaurentPolynomial, t: &[f64]) -> Result<Vec<Vec<f64>>, AnalysisError> {
    let n = f.nvars();
    if t.len() != n {
        return Err(AnalysisError::PointLength { expected: n, got: t.len() });
    }
    let terms: Vec<(Vec<f64>, f64)> = f
        .terms()
        .map(|(m, c)| {
            let e: f64 = m.0.iter().zip(t).map(|(&a, b)| a as f64 * b).sum();
            (m.0.iter().map(|&a| a as f64).collect(), rational_to_f64(c) * e.exp())
        })
        .collect();
    let total: f64 = terms.iter().map(|(_, v)| v).sum();
    if !(total > 0.0) {
        return Err(AnalysisError::NonPositive(format!("{total}")));
    }
    let mut mu = vec![0.0; n];
    for (m, v) in &terms {
        for (a, b) in mu.iter_mut().zip(m) {
            *a += v / total * b;
        }
    }
    let mut h = vec![vec![0.0; n]; n];
    for (m, v) in &terms {
        let w = v / total;
        for i in 0..n {
            for j in 0..n {
                h[i][j] += w * (m[i] - mu[i]) * (m[j] - mu[j]);
            }
        }
    }
    Ok(h)
}

/// Differences `m − m′` of the support generate `ℤ^ℓ`.
pub fn lattice_span_check(f: &LaurentPolynomial) -> bool {
    let n = f.nvars();
    let pts = f.support_points();
    let Some(base) = pts.first() else { return false };
    if n == 0 {
        return true;
    }
    let rows: Vec<Vec<i64>> = pts[1..].iter().map(|m| m.minus(base).0).collect();
    if rows.is_empty() || intlin::rank(&rows) < n {
        return false;
    }
    intlin::smith_diagonal(&rows).iter().take(n).all(|d| d == &BigInt::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    /// No violation at any sampled point.
    Passed,
    Violated,
    /// Only near-singular or near-equality points failed.
    Borderline,
    /// The check's hypotheses do not hold for this input.
    HypothesisFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckWitness {
    pub point: Vec<f64>,
    /// Smallest eigenvalue, or `lhs − rhs` of the violated inequality.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub status: CheckStatus,
    pub samples: u64,
    pub witness: Option<CheckWitness>,
    pub detail: Option<String>,
}

impl Check {
    fn hypothesis(detail: impl Into<String>) -> Self {
        Check { status: CheckStatus::HypothesisFailed, samples: 0, witness: None, detail: Some(detail.into()) }
    }
}

enum Pd {
    Yes,
    Borderline,
    No,
}

/// Cholesky with pivot tolerance.
fn cholesky_pd(a: &[Vec<f64>]) -> Pd {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    let mut borderline = false;
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d < -PIVOT_TOL {
            return Pd::No;
        }
        if d <= PIVOT_TOL {
            borderline = true;
            d = d.max(PIVOT_TOL);
        }
        let r = d.sqrt();
        l[j][j] = r;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / r;
        }
    }
    if borderline {
        Pd::Borderline
    } else {
        Pd::Yes
    }
}

fn min_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn interior_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| log_uniform(rng, 1e-2, 1e2)).collect()
}

/// Samples `J_f` on the open orthant and tests positive definiteness.
pub fn check_pd_on_samples(f: &LaurentPolynomial, cfg: &SamplerConfig) -> Check {
    let n = f.nvars();
    if f.is_zero() {
        return Check::hypothesis("polynomial is zero");
    }
    if !f.has_nonnegative_exponents() {
        return Check::hypothesis("negative exponents");
    }
    let dim = newton_polytope(f).map(|p| p.affine_dimension()).unwrap_or(0);
    if dim < n {
        return Check::hypothesis(format!("newton polytope has dimension {dim} < {n}"));
    }
    let mut rng = rng_for(cfg.seed, Stage::Analysis, 0);
    let mut out = Check { status: CheckStatus::Passed, samples: 0, witness: None, detail: None };
    for _ in 0..cfg.sample_count {
        let s = interior_point(&mut rng, n);
        out.samples += 1;
        let j = match j_matrix(f, &s) {
            Ok(j) => j,
            Err(e) => {
                out.status = CheckStatus::HypothesisFailed;
                out.witness = Some(CheckWitness { point: s, value: f64::NAN });
                out.detail = Some(e.to_string());
                return out;
            }
        };
        match cholesky_pd(&j.entries) {
            Pd::Yes => {}
            Pd::Borderline => {
                if out.status == CheckStatus::Passed {
                    out.status = CheckStatus::Borderline;
                    out.witness = Some(CheckWitness { value: min_eigenvalue(&j.entries), point: s });
                }
            }
            Pd::No => {
                out.status = CheckStatus::Violated;
                out.witness = Some(CheckWitness { value: min_eigenvalue(&j.entries), point: s });
                return out;
            }
        }
    }
    out
}

/// Strict monotonicity `f(s₁…s_{k−1},0…) < f(s₁…s_k,0…)` and strict
/// log-convexity `f(√(s s′))² < f(s) f(s′)` for `s ≠ s′`, sampled.
pub fn monotonicity_and_logconvexity_check(
    f: &LaurentPolynomial,
    cfg: &SamplerConfig,
) -> Result<Check, AnalysisError> {
    if f.is_zero() {
        return Err(AnalysisError::Zero);
    }
    if !f.has_nonnegative_exponents() {
        return Err(AnalysisError::NegativeExponents);
    }
    let n = f.nvars();
    let fp = FloatPoly::new(f);
    let mut rng = rng_for(cfg.seed, Stage::Analysis, 1);
    let tol = cfg.eps;
    let mut out = Check { status: CheckStatus::Passed, samples: 0, witness: None, detail: None };
    let note = |out: &mut Check, point: Vec<f64>, lhs: f64, rhs: f64, what: &str| {
        let gap = lhs - rhs;
        let rel = gap / rhs.abs().max(f64::MIN_POSITIVE);
        if rel > tol {
            out.status = CheckStatus::Violated;
            out.witness = Some(CheckWitness { point, value: gap });
            out.detail = Some(what.into());
            true
        } else {
            if rel > -tol && out.status == CheckStatus::Passed {
                out.status = CheckStatus::Borderline;
                out.witness = Some(CheckWitness { point, value: gap });
                out.detail = Some(what.into());
            }
            false
        }
    };
    for _ in 0..cfg.sample_count {
        out.samples += 1;
        let s = interior_point(&mut rng, n);
        for k in 1..=n {
            let lo: Vec<f64> = (0..n).map(|i| if i + 1 < k { s[i] } else { 0.0 }).collect();
            let hi: Vec<f64> = (0..n).map(|i| if i < k { s[i] } else { 0.0 }).collect();
            if note(&mut out, hi.clone(), fp.eval(&lo).0, fp.eval(&hi).0, "monotonicity") {
                return Ok(out);
            }
        }
        let t = interior_point(&mut rng, n);
        if s.iter().zip(&t).all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs()) {
            continue;
        }
        let g: Vec<f64> = s.iter().zip(&t).map(|(a, b)| (a * b).sqrt()).collect();
        let lhs = fp.eval(&g).0.powi(2);
        let rhs = fp.eval(&s).0 * fp.eval(&t).0;
        let point: Vec<f64> = s.iter().chain(&t).copied().collect();
        if note(&mut out, point, lhs, rhs, "log-convexity") {
            return Ok(out);
        }
    }
    Ok(out)
}

/// Chart coordinates of `z` in the first cone whose off-cone coordinates
/// are nonzero.
fn chart_of(h: &HomogenizedPolynomial, z: &[Complex64]) -> Option<(usize, Vec<Complex64>)> {
    (0..h.fan.cones.len()).find_map(|sigma| h.fan.normalize_to_chart(sigma, z).ok().map(|(_, s)| (sigma, s)))
}

/// `z` and `w` lie in one `G`-orbit: both normalize to equal chart points.
pub fn same_orbit(h: &HomogenizedPolynomial, z: &[Complex64], w: &[Complex64]) -> bool {
    let Some((sigma, a)) = chart_of(h, z) else { return false };
    let Ok((_, b)) = h.fan.normalize_to_chart(sigma, w) else { return false };
    a.iter().zip(&b).all(|(x, y)| (x - y).norm() <= 1e-9 * (1.0 + x.norm()))
}

/// `|P̃(z, w̄)|² < P̃(z, z̄) P̃(w, w̄)` on sampled pairs from distinct orbits.
pub fn sgcs_sample_check(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> Check {
    let mut rng = rng_for(cfg.seed, Stage::Sgcs, 0);
    let nr = h.nrays();
    let mut out = Check { status: CheckStatus::Passed, samples: 0, witness: None, detail: None };
    let mut excluded = 0u64;
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Complex64> {
        (0..nr).map(|_| Complex64::from_polar(log_uniform(rng, 0.1, 10.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect()
    };
    for i in 0..cfg.sample_count {
        let z = draw(&mut rng);
        // Every fourth pair is a constructed same-orbit pair.
        let w = if i % 4 == 3 {
            let lat = h.fan.relation_lattice();
            let c: Vec<Complex64> = (0..lat.rank()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0))).collect();
            let g = crate::fan::complex_group_element(&lat, &c, nr);
            g.iter().zip(&z).map(|(a, b)| a * b).collect()
        } else {
            draw(&mut rng)
        };
        if same_orbit(h, &z, &w) {
            excluded += 1;
            continue;
        }
        out.samples += 1;
        let (Ok(zw), Ok(zz), Ok(ww)) = (h.polarized_eval(&z, &w), h.polarized_eval(&z, &z), h.polarized_eval(&w, &w)) else {
            continue;
        };
        let lhs = zw.norm_sqr();
        let rhs = zz.re * ww.re;
        let rel = (lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE);
        if rel > cfg.eps {
            let point = z.iter().chain(&w).flat_map(|c| [c.re, c.im]).collect();
            out.status = CheckStatus::Violated;
            out.witness = Some(CheckWitness { point, value: lhs - rhs });
            break;
        }
    }
    out.detail = Some(format!("{excluded} same-orbit pairs excluded"));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartAnalysis {
    pub cone: usize,
    pub lattice_span: bool,
    pub j_at_ones: JMatrixOrError,
    pub positive_definite: Check,
    pub monotone_logconvex: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum JMatrixOrError {
    Matrix(JMatrix),
    Error { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub charts: Vec<ChartAnalysis>,
    pub polarized: Check,
    pub notes: Vec<String>,
}

/// Runs every check on the chart restrictions of `h`.
pub fn analyze_charts(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> AnalysisReport {
    let charts = (0..h.fan.cones.len())
        .map(|sigma| {
            let f = h.chart_polynomial(sigma).expect("cone index in range");
            let ones = vec![1.0; f.nvars()];
            ChartAnalysis {
                cone: sigma,
                lattice_span: lattice_span_check(&f),
                j_at_ones: match j_matrix(&f, &ones) {
                    Ok(j) => JMatrixOrError::Matrix(j),
                    Err(e) => JMatrixOrError::Error { error: e.to_string() },
                },
                positive_definite: check_pd_on_samples(&f, cfg),
                monotone_logconvex: monotonicity_and_logconvexity_check(&f, cfg)
                    .unwrap_or_else(|e| Check::hypothesis(e.to_string())),
            }
        })
        .collect();
    AnalysisReport {
        charts,
        polarized: sgcs_sample_check(h, cfg),
        notes: vec!["the modulus inequality is verified only at sampled points".into()],
    }
}
