//! Is a polynomial with nonnegative exponents positive on `[0, ∞)^d`?
//!
//! Exact certificates are tried first. Otherwise the orthant is sampled and
//! searched in floating point, and every promising point is re-evaluated
//! exactly at a nearby rational point; only exact values become witnesses.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Certificate, Stats, Status};
use crate::laurent::{dyadic_round, int, rational_to_f64, ratio, ExponentVector, LaurentPolynomial};
use crate::sampling::{log_uniform, nelder_mead, FloatPoly, SamplerConfig};
use crate::univariate::{positive_on_half_line, Dense};

/// Float margins below this are re-checked exactly.
pub(crate) const EXACT_GATE: f64 = 1e-6;
const MAX_MULTIPLIER: u32 = 24;
const MULTIPLIER_TERM_CAP: usize = 40_000;
const PROBE_SUBSET_VARS: usize = 10;

#[derive(Debug, Clone)]
pub(crate) struct RealHit {
    pub point: Vec<BigRational>,
    pub value: BigRational,
    /// `-f(s) / Σ |c_m| s^m`.
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct RealResult {
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub hit: Option<RealHit>,
    pub stats: Stats,
}

/// Exact structured coordinates.
fn structured() -> Vec<BigRational> {
    vec![int(0), int(1), int(2), ratio(1, 2), int(10), ratio(1, 10), int(100)]
}

fn scale_at(f: &LaurentPolynomial, s: &[BigRational]) -> f64 {
    let s: Vec<f64> = s.iter().map(rational_to_f64).collect();
    FloatPoly::new(f).eval(&s).1
}

/// Exact value at `s`, as a hit if it is `≤ 0`.
pub(crate) fn exact_hit(f: &LaurentPolynomial, s: &[BigRational]) -> Option<RealHit> {
    let value = f.evaluate(s).expect("nonnegative exponents");
    if value.is_positive() {
        return None;
    }
    let scale = scale_at(f, s);
    let margin = if value.is_zero() || scale == 0.0 { 0.0 } else { -rational_to_f64(&value) / scale };
    Some(RealHit { point: s.to_vec(), value, margin })
}

/// Rational points near a float point, most specific first.
pub(crate) fn snaps(s: &[f64]) -> Vec<Vec<BigRational>> {
    let clean = |x: f64| if x.abs() < 1e-9 { 0.0 } else { x.abs() };
    let mut out = vec![
        s.iter().map(|&x| dyadic_round(clean(x), 40)).collect::<Vec<_>>(),
        s.iter().map(|&x| dyadic_round(clean(x), 12)).collect(),
        s.iter().map(|&x| ratio((clean(x) * 12.0).round() as i64, 12)).collect(),
    ];
    out.dedup();
    out
}

/// Decides the cases that need no search. `None` means undecided.
fn certify(f: &LaurentPolynomial) -> Option<Result<Certificate, RealHit>> {
    let d = f.nvars();
    let zero = vec![BigRational::zero(); d];
    let c0 = f.coefficient(&ExponentVector::zeros(d));
    if !c0.is_positive() {
        return Some(Err(RealHit { point: zero, value: c0, margin: 0.0 }
            .with_exact_margin(f)));
    }
    if f.len() == 1 {
        return Some(Ok(Certificate::PositiveConstant));
    }
    if f.all_coefficients_nonnegative() {
        return Some(Ok(Certificate::NonnegativeCoefficients));
    }
    if d == 1 {
        let dense = Dense::from_laurent(f).expect("one variable");
        if positive_on_half_line(&dense) {
            return Some(Ok(Certificate::SturmSequence));
        }
        return None;
    }
    multiplier_certificate(f).map(|e| Ok(Certificate::PolyaMultiplier { exponent: e }))
}

impl RealHit {
    fn with_exact_margin(mut self, f: &LaurentPolynomial) -> Self {
        let scale = scale_at(f, &self.point);
        if !self.value.is_zero() && scale > 0.0 {
            self.margin = -rational_to_f64(&self.value) / scale;
        }
        self
    }
}

/// Smallest `N ≤ MAX_MULTIPLIER` with `(∏(1 + s_i))^N f` nonnegative.
fn multiplier_certificate(f: &LaurentPolynomial) -> Option<u32> {
    let d = f.nvars();
    let mut m = LaurentPolynomial::one(d);
    for i in 0..d {
        m = &m * &(&LaurentPolynomial::one(d) + &LaurentPolynomial::var(d, i));
    }
    let mut g = f.clone();
    for n in 1..=MAX_MULTIPLIER {
        g = &g * &m;
        if g.all_coefficients_nonnegative() {
            return Some(n);
        }
        if g.len() > MULTIPLIER_TERM_CAP {
            return None;
        }
    }
    None
}

struct Search<'a> {
    f: &'a LaurentPolynomial,
    fp: FloatPoly,
    stats: Stats,
    equality: Option<RealHit>,
    strict: Option<RealHit>,
}

impl<'a> Search<'a> {
    fn done(&self) -> bool {
        self.strict.is_some()
    }

    fn exact(&mut self, s: &[BigRational]) {
        self.stats.exact_checks += 1;
        if let Some(hit) = exact_hit(self.f, s) {
            if hit.value.is_zero() {
                self.equality.get_or_insert(hit);
            } else {
                self.strict = Some(hit);
            }
        }
    }

    fn float(&mut self, s: &[f64]) -> f64 {
        self.stats.samples += 1;
        let (v, scale) = self.fp.eval(s);
        let m = if scale > 0.0 { v / scale } else { 1.0 };
        self.stats.note_margin(Some(m));
        m
    }

    fn float_then_exact(&mut self, s: &[f64]) -> f64 {
        let m = self.float(s);
        if m < EXACT_GATE {
            for p in snaps(s) {
                self.exact(&p);
                if self.done() {
                    break;
                }
            }
        }
        m
    }
}

fn draw<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| if rng.gen_bool(0.1) { 0.0 } else { log_uniform(rng, 1e-4, 1e4) })
        .collect()
}

fn to_orthant(t: &[f64], compactify: bool) -> Vec<f64> {
    t.iter()
        .map(|&x| {
            if compactify {
                let c = x.clamp(0.0, 1.0 - 1e-12);
                c / (1.0 - c)
            } else {
                x.abs()
            }
        })
        .collect()
}

fn from_orthant(s: &[f64], compactify: bool) -> Vec<f64> {
    s.iter().map(|&x| if compactify { x / (1.0 + x) } else { x }).collect()
}

/// Decides `f > 0` on the closed orthant. With `search` false only the
/// exact certificates run.
pub(crate) fn check_real(f: &LaurentPolynomial, cfg: &SamplerConfig, rng: &mut ChaCha8Rng, search: bool) -> RealResult {
    match certify(f) {
        Some(Ok(c)) => {
            return RealResult { status: Status::CertifiedTrue, certificate: Some(c), hit: None, stats: Stats::default() }
        }
        Some(Err(hit)) => {
            return RealResult {
                status: Status::CounterexampleFound,
                certificate: None,
                hit: Some(hit),
                stats: Stats { exact_checks: 1, ..Stats::default() },
            }
        }
        None => {}
    }
    let mut st = Search { f, fp: FloatPoly::new(f), stats: Stats::default(), equality: None, strict: None };
    if search {
        run_search(&mut st, cfg, rng);
    }
    let hit = st.strict.or(st.equality);
    RealResult {
        status: if hit.is_some() { Status::CounterexampleFound } else { Status::Inconclusive },
        certificate: None,
        hit,
        stats: st.stats,
    }
}

fn run_search(st: &mut Search<'_>, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) {
    let d = st.f.nvars();
    let grid = structured();
    let full = grid.len().checked_pow(d as u32).filter(|&c| c <= cfg.sample_count.max(1) / 4 + 1);
    let grid_points = full.unwrap_or(cfg.sample_count / 8);
    for idx in 0..grid_points {
        let p: Vec<BigRational> = if full.is_some() {
            let mut k = idx;
            (0..d)
                .map(|_| {
                    let c = grid[k % grid.len()].clone();
                    k /= grid.len();
                    c
                })
                .collect()
        } else {
            (0..d).map(|_| grid[rng.gen_range(0..grid.len())].clone()).collect()
        };
        let pf: Vec<f64> = p.iter().map(rational_to_f64).collect();
        if st.float(&pf) < EXACT_GATE {
            st.exact(&p);
        }
        if st.done() {
            return;
        }
    }

    let keep = cfg.restart_count.max(1);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..cfg.sample_count {
        let s = draw(rng, d);
        let m = st.float_then_exact(&s);
        if st.done() {
            return;
        }
        if best.len() < keep || m < best[best.len() - 1].0 {
            let pos = best.partition_point(|(b, _)| *b <= m);
            best.insert(pos, (m, s));
            best.truncate(keep);
        }
    }

    for r in 0..cfg.restart_count {
        let start = match best.get(r) {
            Some((_, s)) if r % 2 == 0 => from_orthant(s, cfg.compactify),
            _ => from_orthant(&draw(rng, d), cfg.compactify),
        };
        st.stats.restarts += 1;
        let fp = st.fp.clone();
        let compactify = cfg.compactify;
        let (t, m) = nelder_mead(
            |t| {
                let (v, scale) = fp.eval(&to_orthant(t, compactify));
                if scale > 0.0 { v / scale } else { 1.0 }
            },
            &start,
            0.05,
            200 * d.max(1),
            1e-14,
        );
        st.stats.note_margin(Some(m));
        if m < EXACT_GATE {
            let s = to_orthant(&t, compactify);
            st.float_then_exact(&s);
            if st.done() {
                return;
            }
        }
    }

    probe_leading_forms(st);
}

/// Along directions where a leading form has a negative coefficient, probe
/// far out exactly.
fn probe_leading_forms(st: &mut Search<'_>) {
    let d = st.f.nvars();
    if d > PROBE_SUBSET_VARS {
        return;
    }
    for mask in 1u32..(1 << d) {
        let weight = |m: &ExponentVector| (0..d).filter(|i| mask >> i & 1 == 1).map(|i| m.0[i]).sum::<i64>();
        let top = st.f.terms().map(|(m, _)| weight(m)).max().unwrap_or(0);
        if !st.f.terms().any(|(m, c)| weight(m) == top && c.is_negative()) {
            continue;
        }
        for lam in [int(10), int(1000), int(1_000_000), int(1_000_000_000_000)] {
            for rest in [BigRational::zero(), BigRational::one()] {
                let p: Vec<BigRational> =
                    (0..d).map(|i| if mask >> i & 1 == 1 { lam.clone() } else { rest.clone() }).collect();
                st.exact(&p);
                if st.done() {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_with;
    use crate::sampling::{rng_for, Stage};

    fn run(text: &str, vars: &[&str]) -> RealResult {
        let f = parse_with(text, vars).unwrap();
        let cfg = SamplerConfig::with_budget(2000, 8);
        check_real(&f, &cfg, &mut rng_for(1, Stage::Orthant, 0), true)
    }

    #[test]
    fn certificates() {
        assert_eq!(run("3", &[]).certificate, Some(Certificate::PositiveConstant));
        assert_eq!(run("1 + s + t^2", &["s", "t"]).certificate, Some(Certificate::NonnegativeCoefficients));
        assert_eq!(run("(1+s)^4 - 7*s^2", &["s"]).certificate, Some(Certificate::SturmSequence));
        let r = run("((1+s)^4 - 7*s^2)*((1+t)^4 - 7*t^2)", &["s", "t"]);
        assert!(matches!(r.certificate, Some(Certificate::PolyaMultiplier { .. })), "{:?}", r.certificate);
    }

    #[test]
    fn one_minus_s_refuted_at_two() {
        let r = run("1 - s", &["s"]);
        assert_eq!(r.status, Status::CounterexampleFound);
        let hit = r.hit.unwrap();
        assert_eq!(hit.point, vec![int(2)]);
        assert_eq!(hit.value, int(-1));
        assert!(hit.margin > 0.0);
    }

    #[test]
    fn zero_constant_term_is_an_equality_at_origin() {
        let r = run("s - s^2 + t", &["s", "t"]);
        let hit = r.hit.unwrap();
        assert!(hit.value.is_zero());
        assert_eq!(hit.point, vec![int(0), int(0)]);
    }

    #[test]
    fn interior_dip_found_by_search() {
        // Negative only near s = t = 3.
        let r = run("(s-3)^2 + (t-3)^2 - 1/100", &["s", "t"]);
        assert_eq!(r.status, Status::CounterexampleFound);
        let hit = r.hit.unwrap();
        assert!(hit.value.is_negative());
    }

    #[test]
    fn double_root_is_an_equality() {
        let r = run("(s-1)^2", &["s"]);
        let hit = r.hit.unwrap();
        assert_eq!(hit.point, vec![int(1)]);
        assert!(hit.value.is_zero());
    }

    #[test]
    fn leading_form_probe() {
        // Negative only far out along s.
        let r = run("1 + t + s^2*t^2 + s^3 - 1/1000000*s^4 + s^4*t", &["s", "t"]);
        assert_eq!(r.status, Status::CounterexampleFound);
    }

    #[test]
    fn search_disabled_stays_inconclusive() {
        let f = parse_with("1 - s*t", &["s", "t"]).unwrap();
        let r = check_real(&f, &SamplerConfig::default(), &mut rng_for(0, Stage::Orthant, 0), false);
        assert_eq!(r.status, Status::Inconclusive);
        assert_eq!(r.stats.samples, 0);
    }
}
