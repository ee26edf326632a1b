//! Sampling directly in the homogeneous coordinates over all rays.
//!
//! Float candidates are normalized into a chart and confirmed there exactly,
//! so witnesses are the same kind as in chart mode.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::orthant::{exact_hit, snaps, EXACT_GATE};
use super::pos3::{exact_modulus_hit, witness_from, ExactPoint};
use super::{derivative_chart_polynomial, orthant_witness, pos2_witness, Stats, Witness};
use crate::fan::Orbit;
use crate::homogenize::HomogenizedPolynomial;
use crate::laurent::{dyadic_round, ratio, GaussianRational};
use crate::sampling::{log_uniform, rng_for, FloatPoly, SamplerConfig, Stage};

fn modulus<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.1) {
        0.0
    } else {
        log_uniform(rng, 1e-2, 1e2)
    }
}

/// Cones whose off-cone coordinates are all nonzero, best conditioned first.
fn charts_for(h: &HomogenizedPolynomial, z: &[Complex64], must_contain: Option<usize>) -> Vec<(usize, Vec<Complex64>)> {
    let fan = &h.fan;
    let mut out: Vec<(f64, usize, Vec<Complex64>)> = fan
        .cones
        .iter()
        .enumerate()
        .filter(|(_, c)| must_contain.is_none_or(|r| c.rays.contains(&r)))
        .filter_map(|(sigma, _)| {
            let (_, s) = fan.normalize_to_chart(sigma, z).ok()?;
            let worst = s.iter().map(|x| x.norm()).fold(0.0, f64::max);
            worst.is_finite().then_some((worst, sigma, s))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.into_iter().map(|(_, s, v)| (s, v)).collect()
}

fn first_in_order(results: Vec<(Option<Witness>, Stats)>) -> (Option<Witness>, Stats) {
    let mut stats = Stats::default();
    let mut strict = None;
    let mut equality = None;
    for (w, s) in results {
        stats.absorb(&s);
        match w {
            Some(w) if !w.equality => {
                strict.get_or_insert(w);
            }
            Some(w) => {
                equality.get_or_insert(w);
            }
            None => {}
        }
    }
    (strict.or(equality), stats)
}

fn real_sample(h: &HomogenizedPolynomial, rng: &mut ChaCha8Rng, zero_ray: Option<usize>) -> Option<Vec<f64>> {
    let x: Vec<f64> = (0..h.nrays()).map(|r| if Some(r) == zero_ray { 0.0 } else { modulus(rng) }).collect();
    (!h.fan.in_irrelevant_set_by(|r| x[r] == 0.0)).then_some(x)
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Ambient search for nonpositive values of `∂p̃/∂z_ρ` on `z_ρ = 0`.
pub(super) fn search_pos2(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> (Option<Witness>, Stats) {
    let results = (0..h.nrays())
        .into_par_iter()
        .map(|rho| {
            let fp = FloatPoly::new(&h.partial(rho));
            let mut rng = rng_for(cfg.seed, Stage::Pos2, 1 << 32 | rho as u64);
            let mut stats = Stats::default();
            let mut equality = None;
            for _ in 0..cfg.sample_count {
                let Some(x) = real_sample(h, &mut rng, Some(rho)) else { continue };
                stats.samples += 1;
                let (v, scale) = fp.eval(&x);
                let m = if scale > 0.0 { v / scale } else { 1.0 };
                stats.note_margin(Some(m));
                if m >= EXACT_GATE {
                    continue;
                }
                for (sigma, s) in charts_for(h, &to_complex(&x), Some(rho)) {
                    let d = derivative_chart_polynomial(h, sigma, rho);
                    let rest: Vec<f64> = h.fan.cones[sigma]
                        .rays
                        .iter()
                        .zip(&s)
                        .filter(|(&r, _)| r != rho)
                        .map(|(_, v)| v.re)
                        .collect();
                    for p in snaps(&rest) {
                        stats.exact_checks += 1;
                        if let Some(hit) = exact_hit(&d, &p) {
                            let w = pos2_witness(h, sigma, rho, &hit);
                            if !w.equality {
                                return (Some(w), stats);
                            }
                            equality.get_or_insert(w);
                        }
                    }
                }
            }
            (equality, stats)
        })
        .collect();
    first_in_order(results)
}

/// Ambient search for nonpositive values of `p̃` on the orthant.
pub(super) fn search_orthant(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> (Option<Witness>, Stats) {
    let fp = FloatPoly::new(&h.as_polynomial());
    let results = (0..h.fan.cones.len())
        .into_par_iter()
        .map(|batch| {
            let mut rng = rng_for(cfg.seed, Stage::Orthant, 1 << 32 | batch as u64);
            let mut stats = Stats::default();
            let mut equality = None;
            for _ in 0..cfg.sample_count {
                let Some(x) = real_sample(h, &mut rng, None) else { continue };
                stats.samples += 1;
                let (v, scale) = fp.eval(&x);
                let m = if scale > 0.0 { v / scale } else { 1.0 };
                stats.note_margin(Some(m));
                if m >= EXACT_GATE {
                    continue;
                }
                for (sigma, s) in charts_for(h, &to_complex(&x), None) {
                    let f = h.chart_polynomial(sigma).expect("cone index in range");
                    let re: Vec<f64> = s.iter().map(|v| v.re).collect();
                    for p in snaps(&re) {
                        stats.exact_checks += 1;
                        if let Some(hit) = exact_hit(&f, &p) {
                            let w = orthant_witness(h, sigma, &hit);
                            if !w.equality {
                                return (Some(w), stats);
                            }
                            equality.get_or_insert(w);
                        }
                    }
                }
            }
            (equality, stats)
        })
        .collect();
    first_in_order(results)
}

/// Exact chart points near `s`, phases snapped to quarter turns or kept.
fn chart_snaps(s: &[Complex64]) -> Vec<ExactPoint> {
    let quarter = |t: f64| GaussianRational::polar_quarter(&ratio(1, 1), ((t / (PI / 2.0)).round() as i64).rem_euclid(4) as u8);
    let mods = |bits: i32| s.iter().map(|v| if v.norm() < 1e-9 { ratio(0, 1) } else { dyadic_round(v.norm(), bits) }).collect();
    let tan = |t: f64| {
        let half = t.rem_euclid(2.0 * PI) / 2.0;
        if (half - PI / 2.0).abs() < 1e-6 {
            quarter(t)
        } else {
            GaussianRational::unit_from_tan(&dyadic_round(half.tan(), 40))
        }
    };
    vec![
        ExactPoint { moduli: mods(12), units: s.iter().map(|v| quarter(v.arg())).collect() },
        ExactPoint { moduli: mods(40), units: s.iter().map(|v| tan(v.arg())).collect() },
    ]
}

/// Ambient search for `|p̃(z)| ≥ p̃(|z|)` off the excluded set.
pub(super) fn search_pos3(h: &HomogenizedPolynomial, cfg: &SamplerConfig) -> (Option<Witness>, Stats) {
    let fp = FloatPoly::new(&h.as_polynomial());
    let results = (0..h.fan.cones.len())
        .into_par_iter()
        .map(|batch| {
            let mut rng = rng_for(cfg.seed, Stage::Pos3, 1 << 32 | batch as u64);
            let mut stats = Stats::default();
            let mut equality = None;
            for _ in 0..cfg.sample_count {
                let quarter = rng.gen_bool(0.5);
                let z: Vec<Complex64> = (0..h.nrays())
                    .map(|_| {
                        let r = modulus(&mut rng);
                        let t = if quarter {
                            f64::from(rng.gen_range(0u8..4)) * PI / 2.0
                        } else {
                            rng.gen_range(0.0..2.0 * PI)
                        };
                        Complex64::from_polar(r, t)
                    })
                    .collect();
                if h.fan.in_irrelevant_set(&z).unwrap_or(true) {
                    continue;
                }
                if !matches!(h.fan.in_unitary_orbit_of_orthant(&z), Ok(Orbit::No)) {
                    continue;
                }
                stats.samples += 1;
                let (v, a, scale) = fp.eval_complex(&z);
                let slack = if scale > 0.0 { (a - v.norm()) / scale } else { 1.0 };
                stats.note_margin(Some(slack));
                if slack >= EXACT_GATE {
                    continue;
                }
                for (sigma, s) in charts_for(h, &z, None) {
                    let f = h.chart_polynomial(sigma).expect("cone index in range");
                    for p in chart_snaps(&s) {
                        stats.exact_checks += 1;
                        if let Some(hit) = exact_modulus_hit(&f, &p) {
                            let w = witness_from(h, sigma, &hit);
                            if !w.equality {
                                return (Some(w), stats);
                            }
                            equality.get_or_insert(w);
                        }
                    }
                }
            }
            (equality, stats)
        })
        .collect();
    first_in_order(results)
}
