//! Seeded sampling utilities shared by the positivity and analysis checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::laurent::{rational_to_f64, LaurentPolynomial};

/// Where Pos2/Pos3 points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// In the affine charts of the maximal cones.
    Chart,
    /// Directly in the homogeneous coordinates over all rays.
    Ambient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub sample_count: usize,
    pub restart_count: usize,
    pub eps: f64,
    /// Search the orthant through `s = t / (1 - t)`.
    pub compactify: bool,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sample_count: 20_000,
            restart_count: 32,
            eps: 1e-9,
            compactify: true,
            seed: 0,
            mode: SamplingMode::Chart,
        }
    }
}

impl SamplerConfig {
    pub fn with_budget(sample_count: usize, restart_count: usize) -> Self {
        SamplerConfig { sample_count, restart_count, ..Self::default() }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Identifies the consumer of an RNG stream.
#[derive(Debug, Clone, Copy)]
pub enum Stage {
    Pos2 = 2,
    Pos3 = 3,
    Orthant = 4,
    Analysis = 5,
    Markov = 6,
    Sgcs = 7,
}

/// Independent stream for `(seed, stage, index)`.
pub fn rng_for(seed: u64, stage: Stage, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stage as u64) << 48) ^ index);
    rng
}

/// `exp` of a uniform draw in `[ln lo, ln hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Structured nonnegative values used alongside random draws.
pub const STRUCTURED: [f64; 7] = [0.0, 1.0, 2.0, 0.5, 10.0, 0.1, 100.0];

/// Polynomial with nonnegative exponents compiled for fast `f64` evaluation.
#[derive(Debug, Clone)]
pub struct FloatPoly {
    pub nvars: usize,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl FloatPoly {
    pub fn new(p: &LaurentPolynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let e = m.0.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, &e)| (i, e as i32)).collect();
                (rational_to_f64(c), e)
            })
            .collect();
        FloatPoly { nvars: p.nvars(), terms }
    }

    /// `(f(s), Σ |c_m| |s^m|)`.
    pub fn eval(&self, s: &[f64]) -> (f64, f64) {
        let mut v = 0.0;
        let mut scale = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for &(i, k) in e {
                t *= s[i].powi(k);
            }
            v += t;
            scale += t.abs();
        }
        (v, scale)
    }

    /// `(f(w), f(|w|), Σ |c_m| |w|^m)`.
    pub fn eval_complex(&self, w: &[Complex64]) -> (Complex64, f64, f64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut at_abs = 0.0;
        let mut scale = 0.0;
        for (c, e) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            let mut a = *c;
            for &(i, k) in e {
                t *= w[i].powi(k);
                a *= w[i].norm().powi(k);
            }
            v += t;
            at_abs += a;
            scale += a.abs();
        }
        (v, at_abs, scale)
    }
}

/// Nelder–Mead minimization. Returns the best point and value.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let d = start.len();
    if d == 0 {
        return (Vec::new(), f(start));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..d {
        let mut p = start.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let cmp = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.total_cmp(&b.1);
    for _ in 0..max_iter {
        simplex.sort_by(cmp);
        let (best, worst) = (simplex[0].1, simplex[d].1);
        if (worst - best).abs() <= tol * (1.0 + best.abs()) {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (p, _) in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / d as f64;
            }
        }
        let along = |t: f64, w: &[f64]| -> Vec<f64> {
            centroid.iter().zip(w).map(|(c, x)| c + t * (x - c)).collect()
        };
        let xr = along(-1.0, &simplex[d].0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0, &simplex[d].0);
            let fe = f(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = if fr < simplex[d].1 { along(-0.5, &simplex[d].0) } else { along(0.5, &simplex[d].0) };
            let fc = f(&xc);
            if fc < fr.min(simplex[d].1) {
                simplex[d] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = b.iter().zip(&item.0).map(|(x, y)| x + 0.5 * (y - x)).collect();
                    let v = f(&p);
                    *item = (p, v);
                }
            }
        }
    }
    simplex.sort_by(cmp);
    let (p, v) = simplex.swap_remove(0);
    (p, v)
}
