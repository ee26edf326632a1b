//! The strict modulus inequality `|p̃(z)| < p̃(|z|)` off `Z(Σ)` and off the
//! `G ∩ U(1)` orbit of the orthant.
//!
//! Both sides transform by `|χ^L(g)|` under `G`, so every point may be moved
//! into a chart `z = φ_σ(w)`. There the excluded orbit is exactly the set of
//! `w` whose nonzero coordinates are positive reals, and it suffices to take
//! `|w_k| ≤ 1`: the cone of the vertex maximizing `⟨m, log|x|⟩` has all chart
//! moduli at most one, and these closed polydiscs cover the variety.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ambient, ambient_of, Certificate, PartVerdict, Stats, Status, Verdict, Witness};
use crate::analysis::lattice_span_check;
use crate::homogenize::HomogenizedPolynomial;
use crate::laurent::{dyadic_round, format_rational, int, ratio, rational_to_f64, GaussianRational, LaurentPolynomial};
use crate::sampling::{log_uniform, nelder_mead, rng_for, FloatPoly, SamplerConfig, SamplingMode, Stage};

const EXACT_GATE: f64 = 1e-6;
const STRUCTURED_CAP: usize = 4096;
const EXCLUDED_ANGLE: f64 = 1e-8;

/// A chart point with exact modulus and exact unit phase per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ExactPoint {
    pub moduli: Vec<BigRational>,
    pub units: Vec<GaussianRational>,
}

impl ExactPoint {
    fn coords(&self) -> Vec<GaussianRational> {
        self.moduli.iter().zip(&self.units).map(|(r, u)| u.scaled(r)).collect()
    }

    /// Every nonzero coordinate is a positive real.
    fn excluded(&self) -> bool {
        self.moduli.iter().zip(&self.units).all(|(r, u)| r.is_zero() || u.is_real_positive())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ModulusHit {
    pub point: Vec<GaussianRational>,
    pub abs_sq: BigRational,
    pub reference_sq: BigRational,
    pub ratio: f64,
    pub margin: f64,
    pub equality: bool,
}

/// Exact check of `|f(w)| < f(|w|)` at a point off the excluded set.
pub(crate) fn exact_modulus_hit(f: &LaurentPolynomial, p: &ExactPoint) -> Option<ModulusHit> {
    if p.excluded() {
        return None;
    }
    let w = p.coords();
    let fw = f.evaluate(&w).expect("nonnegative exponents");
    let a = f.evaluate(&p.moduli).expect("nonnegative exponents");
    let abs_sq = fw.norm_sqr();
    let reference_sq = &a * &a;
    let (violates, equality) = if !a.is_positive() {
        (true, a.is_zero() && abs_sq.is_zero())
    } else {
        (abs_sq >= reference_sq, abs_sq == reference_sq)
    };
    if !violates {
        return None;
    }
    let mods: Vec<f64> = p.moduli.iter().map(rational_to_f64).collect();
    let scale = FloatPoly::new(f).eval(&mods).1;
    let (fa, fw) = (rational_to_f64(&a), rational_to_f64(&abs_sq).sqrt());
    let ratio = if fa > 0.0 { fw / fa } else { f64::INFINITY };
    let margin = if equality || scale == 0.0 { 0.0 } else { (fw - fa) / scale };
    Some(ModulusHit { point: w, abs_sq, reference_sq, ratio, margin, equality })
}

/// Nonnegative coefficients, positive constant term, and on every
/// coordinate face the surviving support generates the lattice.
pub(crate) fn spanning_certificate(f: &LaurentPolynomial) -> bool {
    let d = f.nvars();
    if !f.all_coefficients_nonnegative() || !f.coefficient(&crate::laurent::ExponentVector::zeros(d)).is_positive() {
        return false;
    }
    if d > 16 {
        return false;
    }
    (1u32..(1 << d)).all(|mask| {
        let keep: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let face = LaurentPolynomial::from_terms(
            keep.len(),
            f.terms()
                .filter(|(m, _)| (0..d).all(|i| mask >> i & 1 == 1 || m.0[i] == 0))
                .map(|(m, c)| (keep.iter().map(|&i| m.0[i]).collect::<Vec<_>>().into(), c.clone())),
        );
        lattice_span_check(&face)
    })
}

fn quarter_unit(q: u8) -> GaussianRational {
    GaussianRational::polar_quarter(&BigRational::one(), q)
}

/// `0` and `r·i^q` for `r ∈ {1, 1/2, 1/3}`, `q ∈ 0..4`.
fn structured_values() -> Vec<(BigRational, u8)> {
    let mut v = vec![(BigRational::zero(), 0)];
    for r in [int(1), ratio(1, 2), ratio(1, 3)] {
        for q in 0..4 {
            v.push((r.clone(), q));
        }
    }
    v
}

/// Exact points near a float chart point `(|w_k|, arg w_k)`.
fn snaps(r: &[f64], theta: &[f64]) -> Vec<ExactPoint> {
    let clean = |x: f64| if x < 1e-9 { 0.0 } else { x };
    let quarters: Vec<GaussianRational> = theta
        .iter()
        .map(|t| quarter_unit(((t / (PI / 2.0)).round() as i64).rem_euclid(4) as u8))
        .collect();
    let tans: Vec<GaussianRational> = theta
        .iter()
        .zip(&quarters)
        .map(|(t, q)| {
            let half = t.rem_euclid(2.0 * PI) / 2.0;
            if (half - PI / 2.0).abs() < 1e-6 {
                q.clone()
            } else {
                GaussianRational::unit_from_tan(&dyadic_round(half.tan(), 40))
            }
        })
        .collect();
    let twelfths: Vec<BigRational> = r.iter().map(|&x| ratio((clean(x) * 12.0).round() as i64, 12)).collect();
    let fine: Vec<BigRational> = r.iter().map(|&x| dyadic_round(clean(x), 40)).collect();
    let mut out = vec![
        ExactPoint { moduli: twelfths.clone(), units: quarters.clone() },
        ExactPoint { moduli: fine.clone(), units: quarters },
        ExactPoint { moduli: fine, units: tans },
    ];
    out.dedup();
    out
}

struct Search<'a> {
    f: &'a LaurentPolynomial,
    fp: FloatPoly,
    stats: Stats,
    equality: Option<ModulusHit>,
    strict: Option<ModulusHit>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.strict.is_some()
    }

    fn exact(&mut self, p: &ExactPoint) {
        if p.excluded() {
            return;
        }
        self.stats.exact_checks += 1;
        if let Some(hit) = exact_modulus_hit(self.f, p) {
            if hit.equality {
                self.equality.get_or_insert(hit);
            } else {
                self.strict = Some(hit);
            }
        }
    }

    /// `(f(|w|) − |f(w)|) / S(|w|)`, or `None` near the excluded set.
    fn slack(fp: &FloatPoly, r: &[f64], theta: &[f64]) -> Option<f64> {
        let near = r.iter().zip(theta).all(|(&m, &t)| {
            let a = t.rem_euclid(2.0 * PI);
            m == 0.0 || a.min(2.0 * PI - a) < EXCLUDED_ANGLE
        });
        if near {
            return None;
        }
        let w: Vec<Complex64> = r.iter().zip(theta).map(|(&m, &t)| Complex64::from_polar(m, t)).collect();
        let (v, a, scale) = fp.eval_complex(&w);
        Some(if scale > 0.0 { (a - v.norm()) / scale } else { 1.0 })
    }

    fn float_then_exact(&mut self, r: &[f64], theta: &[f64]) -> Option<f64> {
        self.stats.samples += 1;
        let s = Self::slack(&self.fp, r, theta)?;
        self.stats.note_margin(Some(s));
        if s < EXACT_GATE {
            for p in snaps(r, theta) {
                self.exact(&p);
                if self.done() {
                    break;
                }
            }
        }
        Some(s)
    }
}

fn draw<R: Rng>(rng: &mut R, d: usize) -> (Vec<f64>, Vec<f64>) {
    let quarter = rng.gen_bool(0.5);
    let r = (0..d)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < 0.1 {
                0.0
            } else if u < 0.2 {
                1.0
            } else {
                log_uniform(rng, 1e-3, 1.0)
            }
        })
        .collect();
    let t = (0..d)
        .map(|_| if quarter { f64::from(rng.gen_range(0u8..4)) * PI / 2.0 } else { rng.gen_range(0.0..2.0 * PI) })
        .collect();
    (r, t)
}

pub(crate) struct ChartResult {
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub hit: Option<ModulusHit>,
    pub stats: Stats,
}

/// Modulus check of one chart polynomial over `|w_k| ≤ 1`.
pub(crate) fn check_chart(f: &LaurentPolynomial, cfg: &SamplerConfig, rng: &mut ChaCha8Rng, search: bool) -> ChartResult {
    if spanning_certificate(f) {
        return ChartResult {
            status: Status::CertifiedTrue,
            certificate: Some(Certificate::SpanningSupport),
            hit: None,
            stats: Stats::default(),
        };
    }
    let mut st = Search { f, fp: FloatPoly::new(f), stats: Stats::default(), equality: None, strict: None };
    if search {
        structured_pass(&mut st, rng);
        if !st.done() {
            random_pass(&mut st, cfg, rng);
        }
    }
    let hit = st.strict.or(st.equality);
    ChartResult {
        status: if hit.is_some() { Status::CounterexampleFound } else { Status::Inconclusive },
        certificate: None,
        hit,
        stats: st.stats,
    }
}

fn structured_pass(st: &mut Search<'_>, rng: &mut ChaCha8Rng) {
    let d = st.f.nvars();
    let vals = structured_values();
    let total = vals.len().checked_pow(d as u32).filter(|&t| t <= STRUCTURED_CAP);
    for idx in 0..total.unwrap_or(STRUCTURED_CAP) {
        let mut k = idx;
        let pick: Vec<&(BigRational, u8)> = (0..d)
            .map(|_| {
                let j = if total.is_some() {
                    let j = k % vals.len();
                    k /= vals.len();
                    j
                } else {
                    rng.gen_range(0..vals.len())
                };
                &vals[j]
            })
            .collect();
        let p = ExactPoint {
            moduli: pick.iter().map(|(r, _)| r.clone()).collect(),
            units: pick.iter().map(|(_, q)| quarter_unit(*q)).collect(),
        };
        if p.excluded() {
            continue;
        }
        let r: Vec<f64> = p.moduli.iter().map(rational_to_f64).collect();
        let t: Vec<f64> = pick.iter().map(|(_, q)| f64::from(*q) * PI / 2.0).collect();
        st.stats.samples += 1;
        if Search::slack(&st.fp, &r, &t).is_some_and(|s| s < EXACT_GATE) {
            st.exact(&p);
            if st.done() {
                return;
            }
        }
    }
}

fn random_pass(st: &mut Search<'_>, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) {
    let d = st.f.nvars();
    let keep = cfg.restart_count.max(1);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..cfg.sample_count {
        let (r, t) = draw(rng, d);
        let Some(s) = st.float_then_exact(&r, &t) else { continue };
        if st.done() {
            return;
        }
        if best.len() < keep || s < best[best.len() - 1].0 {
            let x: Vec<f64> = r.iter().map(|&m| -m.max(1e-12).ln()).chain(t.iter().copied()).collect();
            let pos = best.partition_point(|(b, _)| *b <= s);
            best.insert(pos, (s, x));
            best.truncate(keep);
        }
    }
    let fp = st.fp.clone();
    let split = |x: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (x[..d].iter().map(|l| (-l.abs()).exp()).collect(), x[d..].to_vec())
    };
    for k in 0..cfg.restart_count {
        let start = match best.get(k) {
            Some((_, x)) if k % 2 == 0 => x.clone(),
            _ => {
                let (r, t) = draw(rng, d);
                r.iter().map(|&m| -m.max(1e-3).ln()).chain(t).collect()
            }
        };
        st.stats.restarts += 1;
        let (x, v) = nelder_mead(
            |x| {
                let (r, t) = split(x);
                Search::slack(&fp, &r, &t).unwrap_or(1.0)
            },
            &start,
            0.1,
            200 * d.max(1),
            1e-14,
        );
        st.stats.note_margin(Some(v));
        if v < EXACT_GATE {
            let (r, t) = split(&x);
            st.float_then_exact(&r, &t);
            if st.done() {
                return;
            }
        }
    }
}

pub(crate) fn witness_from(h: &HomogenizedPolynomial, sigma: usize, hit: &ModulusHit) -> Witness {
    Witness {
        cone: Some(sigma),
        ray: None,
        ambient_point: ambient_of(&h.fan, sigma, &hit.point),
        chart_point: hit.point.clone(),
        value: format_rational(&hit.abs_sq),
        reference: Some(format_rational(&hit.reference_sq)),
        ratio: Some(hit.ratio),
        margin: hit.margin,
        equality: hit.equality,
    }
}

/// `|p̃(z)| < p̃(|z|)` for `z` off `Z(Σ) ∪ (G ∩ U(1))·ℝ₊^{Σ(1)}`.
pub fn check_pos3(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> Verdict {
    let search = cfg.mode == SamplingMode::Chart;
    let parts: Vec<PartVerdict> = (0..h.fan.cones.len())
        .into_par_iter()
        .map(|sigma| {
            let f = h.chart_polynomial(sigma).expect("cone index in range");
            let mut rng = rng_for(cfg.seed, Stage::Pos3, sigma as u64);
            let r = check_chart(&f, cfg, &mut rng, search);
            PartVerdict {
                label: format!("cone {sigma}"),
                status: r.status,
                certificate: r.certificate,
                witness: r.hit.as_ref().map(|hit| witness_from(h, sigma, hit)),
                stats: r.stats,
            }
        })
        .collect();
    let extra = (!search && parts.iter().any(|p| p.status == Status::Inconclusive))
        .then(|| ambient::search_pos3(h, cfg));
    let mut v = Verdict::from_parts(parts, extra);
    if !search {
        v.notes.push("ambient sampling".into());
    }
    if v.witness.as_ref().is_some_and(|w| w.equality) {
        v.notes.push("equality-type witness: the strict inequality fails with equality".into());
    }
    v
}
