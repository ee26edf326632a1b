//! Positivity checks on a homogenized polynomial, fully positive coefficient
//! tests and the search for the power threshold `k₀`.
//!
//! Every check reduces to the affine charts of the maximal cones. Each chart
//! (or chart and ray, for the derivative check) is a *part*, decided
//! independently with its own RNG stream, so running parts in parallel never
//! changes a result.

mod ambient;
mod orthant;
mod pos3;
mod powers;
mod report;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::fan::NormalFan;
use crate::homogenize::HomogenizedPolynomial;
use crate::laurent::{format_rational, ExponentVector, GaussianRational, LaurentPolynomial};
use crate::sampling::{rng_for, SamplerConfig, SamplingMode, Stage};

pub use pos3::check_pos3;
pub use powers::{find_k0, is_fully_positive, FullPositivity, K0Outcome, K0Search, TERM_BUDGET};
pub use report::{analyze, AnalyzeError, AnalyzeOptions, Conflict, PositivityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    CertifiedTrue,
    CounterexampleFound,
    Inconclusive,
}

/// How a `CertifiedTrue` verdict was proved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    /// Exact values at the points `e^(σ)`.
    VertexValues,
    /// The polynomial is a positive constant.
    PositiveConstant,
    /// Nonnegative coefficients and a positive constant term.
    NonnegativeCoefficients,
    /// Sturm sequence: no root on the closed half line.
    SturmSequence,
    /// `(∏ (1 + s_i))^exponent · f` has nonnegative coefficients.
    PolyaMultiplier { exponent: u32 },
    /// Nonnegative coefficients whose supports generate the lattice on every
    /// coordinate face.
    SpanningSupport,
    /// Every part certified.
    AllParts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stats {
    pub samples: u64,
    pub restarts: u64,
    pub exact_checks: u64,
    /// Smallest relative slack seen among float samples.
    pub best_margin: Option<f64>,
}

impl Stats {
    fn absorb(&mut self, o: &Stats) {
        self.samples += o.samples;
        self.restarts += o.restarts;
        self.exact_checks += o.exact_checks;
        self.note_margin(o.best_margin);
    }

    fn note_margin(&mut self, m: Option<f64>) {
        if let Some(m) = m {
            if self.best_margin.is_none_or(|b| m < b) {
                self.best_margin = Some(m);
            }
        }
    }
}

/// An exact violation. Points are exact; `value` and `reference` are exact
/// strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub cone: Option<usize>,
    pub ray: Option<usize>,
    pub chart_point: Vec<GaussianRational>,
    pub ambient_point: Vec<GaussianRational>,
    /// The checked value: `f(s)` for sign checks, `|p̃(z)|²` for the modulus check.
    pub value: String,
    /// `p̃(|z|)²` for the modulus check.
    pub reference: Option<String>,
    /// `|p̃(z)| / p̃(|z|)` for the modulus check.
    pub ratio: Option<f64>,
    /// Size of the violation relative to `Σ |c_m| |z^m|`; zero for equalities.
    pub margin: f64,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartVerdict {
    pub label: String,
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    pub stats: Stats,
    /// Exact values, for checks that have one per part.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<PartVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    /// Aggregates parts: any witness refutes (strict witnesses first, then
    /// the first equality), all certificates prove, otherwise inconclusive.
    fn from_parts(parts: Vec<PartVerdict>, extra: Option<(Option<Witness>, Stats)>) -> Verdict {
        let mut stats = Stats::default();
        for p in &parts {
            stats.absorb(&p.stats);
        }
        let mut witnesses: Vec<&Witness> = parts.iter().filter_map(|p| p.witness.as_ref()).collect();
        if let Some((w, s)) = &extra {
            stats.absorb(s);
            witnesses.extend(w.iter());
        }
        let witness = witnesses
            .iter()
            .find(|w| !w.equality)
            .or_else(|| witnesses.first())
            .map(|w| (*w).clone());
        let (status, certificate) = if witness.is_some() {
            (Status::CounterexampleFound, None)
        } else if parts.iter().all(|p| p.status == Status::CertifiedTrue) {
            (Status::CertifiedTrue, Some(Certificate::AllParts))
        } else {
            (Status::Inconclusive, None)
        };
        Verdict { status, certificate, witness, stats, values: Vec::new(), parts, notes: Vec::new() }
    }
}

fn real_point(s: &[BigRational]) -> Vec<GaussianRational> {
    s.iter().cloned().map(GaussianRational::real).collect()
}

fn ambient_of(fan: &NormalFan, sigma: usize, chart: &[GaussianRational]) -> Vec<GaussianRational> {
    fan.phi_sigma(sigma, chart, GaussianRational::real(crate::laurent::int(1)))
        .expect("chart point has cone length")
}

/// `p̃(e^(σ)) > 0` for every maximal cone, decided exactly.
pub fn check_pos1(h: &HomogenizedPolynomial) -> Verdict {
    let fan = &h.fan;
    let mut values = Vec::new();
    let mut parts = Vec::new();
    for sigma in 0..fan.cones.len() {
        let v = h.value_at_e_sigma(sigma).expect("cone index in range");
        values.push(format_rational(&v));
        let ok = v.is_positive();
        let witness = (!ok).then(|| {
            let chart = vec![GaussianRational::real(BigRational::zero()); fan.cones[sigma].rays.len()];
            Witness {
                cone: Some(sigma),
                ray: None,
                ambient_point: ambient_of(fan, sigma, &chart),
                chart_point: chart,
                value: format_rational(&v),
                reference: None,
                ratio: None,
                margin: if v.is_zero() { 0.0 } else { 1.0 },
                equality: v.is_zero(),
            }
        });
        parts.push(PartVerdict {
            label: format!("cone {sigma} vertex {}", fan.cones[sigma].vertex),
            status: if ok { Status::CertifiedTrue } else { Status::CounterexampleFound },
            certificate: ok.then_some(Certificate::VertexValues),
            witness,
            stats: Stats::default(),
        });
    }
    let mut v = Verdict::from_parts(parts, None);
    if v.status == Status::CertifiedTrue {
        v.certificate = Some(Certificate::VertexValues);
    }
    v.values = values;
    v
}

/// `D_{σ,ρ}(s) = ∂p̃/∂z_ρ (φ_σ(s))` with `s_ρ = 0`, in the remaining cone
/// coordinates (cone order).
pub fn derivative_chart_polynomial(h: &HomogenizedPolynomial, sigma: usize, rho: usize) -> LaurentPolynomial {
    let cone = &h.fan.cones[sigma];
    let others: Vec<usize> = cone.rays.iter().copied().filter(|&r| r != rho).collect();
    let terms = h.terms.iter().filter(|t| t.exponents[rho] == 1).map(|t| {
        (ExponentVector(others.iter().map(|&r| t.exponents[r]).collect()), t.coefficient.clone())
    });
    LaurentPolynomial::from_terms(others.len(), terms)
}

/// Chart points `(σ, ρ)` of the derivative check, in cone then ray order.
fn pos2_pairs(fan: &NormalFan) -> Vec<(usize, usize)> {
    fan.cones.iter().enumerate().flat_map(|(s, c)| c.rays.iter().map(move |&r| (s, r))).collect()
}

fn pos2_witness(h: &HomogenizedPolynomial, sigma: usize, rho: usize, hit: &orthant::RealHit) -> Witness {
    let mut chart = Vec::new();
    let mut it = hit.point.iter();
    for &r in &h.fan.cones[sigma].rays {
        chart.push(if r == rho { BigRational::zero() } else { it.next().expect("point length").clone() });
    }
    let chart = real_point(&chart);
    Witness {
        cone: Some(sigma),
        ray: Some(rho),
        ambient_point: ambient_of(&h.fan, sigma, &chart),
        chart_point: chart,
        value: format_rational(&hit.value),
        reference: None,
        ratio: None,
        margin: hit.margin,
        equality: hit.value.is_zero(),
    }
}

fn orthant_witness(h: &HomogenizedPolynomial, sigma: usize, hit: &orthant::RealHit) -> Witness {
    let chart = real_point(&hit.point);
    Witness {
        cone: Some(sigma),
        ray: None,
        ambient_point: ambient_of(&h.fan, sigma, &chart),
        chart_point: chart,
        value: format_rational(&hit.value),
        reference: None,
        ratio: None,
        margin: hit.margin,
        equality: hit.value.is_zero(),
    }
}

fn part_from_real(label: String, r: orthant::RealResult, witness: Option<Witness>) -> PartVerdict {
    PartVerdict { label, status: r.status, certificate: r.certificate, witness, stats: r.stats }
}

/// `∂p̃/∂z_ρ > 0` on the orthant face `z_ρ = 0` off `Z(Σ)`, for every ray.
pub fn check_pos2(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> Verdict {
    let pairs = pos2_pairs(&h.fan);
    let search = cfg.mode == SamplingMode::Chart;
    let parts: Vec<PartVerdict> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(sigma, rho))| {
            let d = derivative_chart_polynomial(h, sigma, rho);
            let mut rng = rng_for(cfg.seed, Stage::Pos2, i as u64);
            let r = orthant::check_real(&d, cfg, &mut rng, search);
            let w = r.hit.as_ref().map(|hit| pos2_witness(h, sigma, rho, hit));
            part_from_real(format!("cone {sigma} ray {rho}"), r, w)
        })
        .collect();
    let extra = (!search && parts.iter().any(|p| p.status == Status::Inconclusive))
        .then(|| ambient::search_pos2(h, cfg));
    let mut v = Verdict::from_parts(parts, extra);
    if !search {
        v.notes.push("ambient sampling".into());
    }
    v
}

/// `p̃ > 0` on the closed orthant off `Z(Σ)`.
pub fn positive_on_orthant(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> Verdict {
    let search = cfg.mode == SamplingMode::Chart;
    let parts: Vec<PartVerdict> = (0..h.fan.cones.len())
        .into_par_iter()
        .map(|sigma| {
            let f = h.chart_polynomial(sigma).expect("cone index in range");
            let mut rng = rng_for(cfg.seed, Stage::Orthant, sigma as u64);
            let r = orthant::check_real(&f, cfg, &mut rng, search);
            let w = r.hit.as_ref().map(|hit| orthant_witness(h, sigma, hit));
            part_from_real(format!("cone {sigma}"), r, w)
        })
        .collect();
    let extra = (!search && parts.iter().any(|p| p.status == Status::Inconclusive))
        .then(|| ambient::search_orthant(h, cfg));
    let mut v = Verdict::from_parts(parts, extra);
    if !search {
        v.notes.push("ambient sampling".into());
    }
    v
}
