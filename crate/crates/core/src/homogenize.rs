//! Homogenization of a Laurent polynomial over the rays of its normal fan.
//!
//! Each term `c_m x^m` becomes `c_m ∏_ρ z_ρ^{E(m)_ρ}` with
//! `E(m)_ρ = ⟨m, u_ρ⟩ + a_ρ ≥ 0`. Terms stay indexed by `m`, so the vertex
//! coefficients can be read off directly.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::fan::NormalFan;
use crate::laurent::{format_rational, rational_to_f64, EvalScalar, ExponentVector, LaurentPolynomial};
use crate::polytope::LatticePolytope;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomogenizeError {
    #[error("fan rays do not match the polytope facets")]
    FanMismatch,
    #[error("exponent {0} lies outside the polytope")]
    OutsidePolytope(ExponentVector),
    #[error("polynomial has {got} variables, polytope has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no maximal cone with index {0}")]
    BadCone(usize),
    #[error("chart permutation must be a permutation of 0..{0}")]
    BadPermutation(usize),
    #[error("chart dimension must lie in 1..={0}")]
    BadChartDimension(usize),
    #[error("vector has {got} coordinates, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomTerm {
    pub m: ExponentVector,
    #[serde(serialize_with = "ser_rational")]
    pub coefficient: BigRational,
    /// `E(m)` over the rays, in ray order.
    pub exponents: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogenizedPolynomial {
    #[serde(skip)]
    pub fan: NormalFan,
    pub terms: Vec<HomTerm>,
}

/// Homogenizes `p` with respect to `polytope` and its normal fan. The
/// support of `p` must lie in the polytope.
pub fn homogenize(
    p: &LaurentPolynomial,
    polytope: &LatticePolytope,
    fan: &NormalFan,
) -> Result<HomogenizedPolynomial, HomogenizeError> {
    if p.nvars() != polytope.nvars() {
        return Err(HomogenizeError::DimensionMismatch { expected: polytope.nvars(), got: p.nvars() });
    }
    let facets = polytope.facets();
    let matches = facets.len() == fan.nrays()
        && facets.iter().zip(&fan.rays).all(|(f, r)| f.normal == r.normal && f.offset == r.offset);
    if !matches {
        return Err(HomogenizeError::FanMismatch);
    }
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        let exponents: Vec<i64> = fan.rays.iter().map(|r| m.dot(&r.normal) + r.offset).collect();
        if exponents.iter().any(|&e| e < 0) {
            return Err(HomogenizeError::OutsidePolytope(m.clone()));
        }
        terms.push(HomTerm { m: m.clone(), coefficient: c.clone(), exponents });
    }
    Ok(HomogenizedPolynomial { fan: fan.clone(), terms })
}

impl HomogenizedPolynomial {
    pub fn nrays(&self) -> usize {
        self.fan.nrays()
    }

    pub fn term_at(&self, m: &ExponentVector) -> Option<&HomTerm> {
        self.terms.iter().find(|t| &t.m == m)
    }

    /// `p̃(z) = Σ c_m ∏ z_ρ^{E(m)_ρ}` with `0^0 = 1`.
    pub fn evaluate<T: EvalScalar>(&self, z: &[T]) -> Result<T, HomogenizeError> {
        self.check_len(z.len())?;
        let mut acc = T::zero_value();
        for t in &self.terms {
            let mut v = T::from_rational(&t.coefficient);
            for (zi, &e) in z.iter().zip(&t.exponents) {
                if e > 0 {
                    v = v.times(&zi.pow_u(e as u64));
                }
            }
            acc = acc.plus(&v);
        }
        Ok(acc)
    }

    fn check_len(&self, got: usize) -> Result<(), HomogenizeError> {
        if got != self.nrays() {
            return Err(HomogenizeError::LengthMismatch { expected: self.nrays(), got });
        }
        Ok(())
    }

    /// `P̃(z, w̄)`: `p̃` evaluated at the coordinatewise product `z · conj(w)`.
    pub fn polarized_eval(&self, z: &[Complex64], w: &[Complex64]) -> Result<Complex64, HomogenizeError> {
        self.check_len(w.len())?;
        let zw: Vec<Complex64> = z.iter().zip(w).map(|(a, b)| a * b.conj()).collect();
        self.evaluate(&zw)
    }

    /// `Σ |c_m| ∏ |z_ρ|^{E(m)_ρ}`, the natural scale of `p̃` at `z`.
    pub fn abs_scale(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut v = rational_to_f64(&t.coefficient).abs();
                for (zi, &e) in z.iter().zip(&t.exponents) {
                    if e > 0 {
                        v *= zi.abs().powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// `p̃` as an ordinary polynomial in the ray variables.
    pub fn as_polynomial(&self) -> LaurentPolynomial {
        LaurentPolynomial::from_terms(
            self.nrays(),
            self.terms.iter().map(|t| (ExponentVector(t.exponents.clone()), t.coefficient.clone())),
        )
    }

    /// `p̃(φ_σ(τ(s_1, …, s_ℓ, 0, …, 0)))` as a polynomial in `ℓ` variables.
    ///
    /// Chart coordinate `k` (the `k`-th ray of `σ`) receives `s_{τ[k]}` when
    /// `τ[k] < ℓ` and zero otherwise; terms with a positive power of a zeroed
    /// coordinate vanish.
    pub fn chart_restriction(
        &self,
        sigma: usize,
        tau: &[usize],
        ell: usize,
    ) -> Result<LaurentPolynomial, HomogenizeError> {
        let cone = self.fan.cones.get(sigma).ok_or(HomogenizeError::BadCone(sigma))?;
        let n = cone.rays.len();
        let mut seen = vec![false; n];
        if tau.len() != n || tau.iter().any(|&t| t >= n || std::mem::replace(&mut seen[t], true)) {
            return Err(HomogenizeError::BadPermutation(n));
        }
        if ell == 0 || ell > n {
            return Err(HomogenizeError::BadChartDimension(n));
        }
        let mut out = Vec::new();
        'terms: for t in &self.terms {
            let mut e = vec![0i64; ell];
            for (k, &r) in cone.rays.iter().enumerate() {
                let x = t.exponents[r];
                if tau[k] < ell {
                    e[tau[k]] = x;
                } else if x > 0 {
                    continue 'terms;
                }
            }
            out.push((ExponentVector(e), t.coefficient.clone()));
        }
        Ok(LaurentPolynomial::from_terms(ell, out))
    }

    /// Full-dimensional chart restriction `f_σ(s) = p̃(φ_σ(s))`.
    pub fn chart_polynomial(&self, sigma: usize) -> Result<LaurentPolynomial, HomogenizeError> {
        let n = self.fan.n;
        let id: Vec<usize> = (0..n).collect();
        self.chart_restriction(sigma, &id, n)
    }

    /// `∂p̃/∂z_ρ` as a polynomial in the ray variables.
    pub fn partial(&self, rho: usize) -> LaurentPolynomial {
        self.as_polynomial().partial(rho)
    }

    /// `p̃(e^(σ))`, computed exactly.
    pub fn value_at_e_sigma(&self, sigma: usize) -> Result<BigRational, HomogenizeError> {
        let e = self.fan.e_sigma(sigma).map_err(|_| HomogenizeError::BadCone(sigma))?;
        let z: Vec<BigRational> = e.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        self.evaluate(&z)
    }

    /// `|p̃(g·z) − χ^L(g) p̃(z)| / (1 + |p̃(z)|)`.
    pub fn check_functional_equation(&self, g: &[Complex64], z: &[Complex64]) -> Result<f64, HomogenizeError> {
        self.check_len(g.len())?;
        let gz: Vec<Complex64> = g.iter().zip(z).map(|(a, b)| a * b).collect();
        let lhs = self.evaluate(&gz)?;
        let pz = self.evaluate(z)?;
        let chi = character_chi_l(&self.fan, g);
        Ok((lhs - chi * pz).norm() / (1.0 + pz.norm()))
    }

    /// Exact difference `p̃(g·z) − χ^L(g) p̃(z)` over ℚ.
    pub fn functional_equation_exact(
        &self,
        g: &[BigRational],
        z: &[BigRational],
    ) -> Result<BigRational, HomogenizeError> {
        self.check_len(g.len())?;
        let gz: Vec<BigRational> = g.iter().zip(z).map(|(a, b)| a * b).collect();
        let lhs = self.evaluate(&gz)?;
        let rhs = character_chi_l(&self.fan, g) * self.evaluate(z)?;
        Ok(lhs - rhs)
    }

    pub fn all_coefficients_positive(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_positive())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_zero())
    }
}

/// `χ^L(g) = ∏ g_ρ^{a_ρ}`; offsets may be negative, so `g` must have no
/// zero coordinate on such rays.
pub fn character_chi_l<T: EvalScalar>(fan: &NormalFan, g: &[T]) -> T {
    let mut acc = T::one_value();
    for (r, gi) in fan.rays.iter().zip(g) {
        let a = r.offset;
        if a > 0 {
            acc = acc.times(&gi.pow_u(a as u64));
        } else if a < 0 {
            acc = acc.times(&gi.inverse().pow_u(a.unsigned_abs()));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{complex_group_element, unitary_group_element};
    use crate::laurent::{int, ratio};
    use crate::parser::parse_with;
    use crate::polytope::newton_polytope;
    use proptest::prelude::*;

    fn setup(text: &str, vars: &[&str]) -> (LaurentPolynomial, HomogenizedPolynomial) {
        let p = parse_with(text, vars).unwrap();
        let poly = newton_polytope(&p).unwrap();
        let fan = NormalFan::build(&poly).unwrap();
        let h = homogenize(&p, &poly, &fan).unwrap();
        (p, h)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn segment_homogenizations() {
        let (_, h) = setup("1+x", &["x"]);
        // rays: u=+1 (a=0), u=-1 (a=1)
        assert_eq!(h.fan.offsets(), vec![0, 1]);
        assert_eq!(h.as_polynomial(), parse_with("z2 + z1", &["z1", "z2"]).unwrap());
        let (_, h2) = setup("1+x^2", &["x"]);
        assert_eq!(h2.as_polynomial(), parse_with("z2^2 + z1^2", &["z1", "z2"]).unwrap());
        assert_eq!(h.evaluate(&[int(1), int(0)]).unwrap(), int(1));
    }

    #[test]
    fn vertex_terms_vanish_on_their_cone() {
        let (p, h) = setup("(1+x1+x2)^2 - 3*x1*x2", &["x1", "x2"]);
        for (s, cone) in h.fan.cones.iter().enumerate() {
            let t = h.term_at(&cone.vertex).unwrap();
            assert!(cone.rays.iter().all(|&r| t.exponents[r] == 0));
            assert_eq!(h.value_at_e_sigma(s).unwrap(), p.coefficient(&cone.vertex));
        }
    }

    #[test]
    fn evaluation_at_ones_is_coefficient_sum() {
        let (p, h) = setup("(1+x1)^4 - 7*x1^2", &["x1"]);
        assert_eq!(h.evaluate(&[int(1), int(1)]).unwrap(), p.coefficient_sum());
    }

    #[test]
    fn polarization() {
        let (_, h) = setup("1 + x1 + 2*x1*x2 - x2^2 + x2", &["x1", "x2"]);
        let k = h.nrays();
        let z: Vec<Complex64> = (0..k).map(|i| c(0.3 + i as f64 * 0.2, -0.4 + i as f64 * 0.1)).collect();
        let w: Vec<Complex64> = (0..k).map(|i| c(1.1 - i as f64 * 0.3, 0.25 * i as f64)).collect();
        let zz = h.polarized_eval(&z, &z).unwrap();
        let abs2: Vec<f64> = z.iter().map(|x| x.norm_sqr()).collect();
        assert!((zz.re - h.evaluate(&abs2).unwrap()).abs() < 1e-12 && zz.im.abs() < 1e-12);
        let ones = vec![c(1.0, 0.0); k];
        assert!((h.polarized_eval(&z, &ones).unwrap() - h.evaluate(&z).unwrap()).norm() < 1e-12);
        let a = h.polarized_eval(&z, &w).unwrap();
        let b = h.polarized_eval(&w, &z).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn chart_restrictions() {
        let (_, h) = setup("1+x", &["x"]);
        let sigma = h.fan.cones.iter().position(|c| c.rays == vec![0]).unwrap();
        assert_eq!(h.chart_restriction(sigma, &[0], 1).unwrap(), parse_with("1+s", &["s"]).unwrap());

        let (p, h) = setup("(1+x1)^2*(2+x2) - x1*x2", &["x1", "x2"]);
        for (s, cone) in h.fan.cones.iter().enumerate() {
            let f = h.chart_restriction(s, &[0, 1], 1).unwrap();
            assert_eq!(f.coefficient(&ExponentVector(vec![0])), h.value_at_e_sigma(s).unwrap());
            let g = h.chart_restriction(s, &[1, 0], 2).unwrap();
            assert_eq!(g.evaluate(&[int(0), int(0)]).unwrap(), h.value_at_e_sigma(s).unwrap());
            // Full chart equals p under m ↦ U_σ m + a_σ.
            let full = h.chart_polynomial(s).unwrap();
            let eta = p.map_exponents(2, |m| {
                ExponentVector(
                    cone.rays.iter().map(|&r| m.dot(&h.fan.rays[r].normal) + h.fan.rays[r].offset).collect(),
                )
            });
            assert_eq!(full, eta);
        }
        assert!(h.chart_restriction(0, &[0, 0], 2).is_err());
        assert!(h.chart_restriction(0, &[0, 1], 3).is_err());
    }

    #[test]
    fn characters() {
        let (_, h) = setup("1+x", &["x"]);
        assert_eq!(character_chi_l(&h.fan, &[int(1), int(1)]), int(1));
        assert_eq!(character_chi_l(&h.fan, &[ratio(3, 2), ratio(3, 2)]), ratio(3, 2));
        let (_, h) = setup("(1+x1+x2)^3", &["x1", "x2"]);
        let lat = h.fan.relation_lattice();
        let g = unitary_group_element(&lat, &[0.77], h.nrays());
        assert!((character_chi_l(&h.fan, &g).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn functional_equation_exact_zero() {
        let (_, h) = setup("x1^3 + 3*x1^2*x2 - x1*x2 + 2*x1^3*x2 + x1", &["x1", "x2"]);
        assert!(h.fan.offsets().contains(&-1));
        let lat = h.fan.relation_lattice();
        // Integer combinations of rational powers: g = 2^{b_1} 3^{b_2} …
        let mut g = vec![int(1); h.nrays()];
        for (b, base) in lat.basis.iter().zip([ratio(2, 1), ratio(1, 3), ratio(5, 7)]) {
            for (gi, &e) in g.iter_mut().zip(b) {
                for _ in 0..e.abs() {
                    if e > 0 {
                        *gi *= &base;
                    } else {
                        *gi /= &base;
                    }
                }
            }
        }
        let z: Vec<BigRational> = (0..h.nrays()).map(|i| ratio(i as i64 + 1, 3)).collect();
        assert!(h.functional_equation_exact(&g, &z).unwrap().is_zero());
        let ones = vec![int(1); h.nrays()];
        assert!(h.functional_equation_exact(&ones, &z).unwrap().is_zero());
    }

    #[test]
    fn homogenized_products_multiply() {
        // Rectangles share one fan, and offsets add under Minkowski sums.
        let (_, hp) = setup("(1+x1)*(2+x2^2)", &["x1", "x2"]);
        let (_, hq) = setup("(3-x1+x1^2)*(1+x2)", &["x1", "x2"]);
        let (_, hpq) = setup("(1+x1)*(2+x2^2)*(3-x1+x1^2)*(1+x2)", &["x1", "x2"]);
        assert_eq!(&hp.as_polynomial() * &hq.as_polynomial(), hpq.as_polynomial());
    }

    #[test]
    fn fan_mismatch() {
        let p = parse_with("1+x", &["x"]).unwrap();
        let poly = newton_polytope(&p).unwrap();
        let other = newton_polytope(&parse_with("1+x^2", &["x"]).unwrap()).unwrap();
        let fan = NormalFan::build(&other).unwrap();
        assert_eq!(homogenize(&p, &poly, &fan), Err(HomogenizeError::FanMismatch));
    }

    proptest! {
        #[test]
        fn exponents_follow_normals(extra in prop::collection::vec(((1i64..3, 0i64..4), -4i64..5), 0..6)) {
            let mut terms: Vec<(ExponentVector, BigRational)> = vec![
                (ExponentVector(vec![0, 0]), int(1)),
                (ExponentVector(vec![3, 0]), int(1)),
                (ExponentVector(vec![0, 3]), int(1)),
                (ExponentVector(vec![3, 3]), int(-2)),
            ];
            terms.extend(extra.into_iter().map(|((a, b), c)| (ExponentVector(vec![a, b]), int(c))));
            let p = LaurentPolynomial::from_terms(2, terms);
            let poly = newton_polytope(&p).unwrap();
            let fan = NormalFan::build(&poly).unwrap();
            let h = homogenize(&p, &poly, &fan).unwrap();
            let u = h.fan.normal_matrix();
            for a in &h.terms {
                prop_assert!(a.exponents.iter().all(|&e| e >= 0));
                for b in &h.terms {
                    for (r, row) in u.iter().enumerate() {
                        prop_assert_eq!(a.exponents[r] - b.exponents[r], a.m.minus(&b.m).dot(row));
                    }
                }
            }
        }

        #[test]
        fn functional_equation_numeric(params in prop::collection::vec((-1.0f64..1.0, -3.0f64..3.0), 2),
                                       zs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4)) {
            let (_, h) = setup("(1+x1)^2*(1+x2) - 2*x1*x2 + 3*x1^2*x2", &["x1", "x2"]);
            let lat = h.fan.relation_lattice();
            let cp: Vec<Complex64> = params.iter().map(|&(a, b)| c(a, b)).collect();
            let g = complex_group_element(&lat, &cp, h.nrays());
            let z: Vec<Complex64> = zs.iter().map(|&(a, b)| c(a, b)).collect();
            prop_assert!(h.check_functional_equation(&g, &z).unwrap() <= 1e-9);
        }

        #[test]
        fn chart_pullback_matches_original(xs in prop::collection::vec(0.1f64..4.0, 2), sigma in 0usize..4) {
            let (p, h) = setup("(1+x1)^2*(1+x2)^3 - x1*x2", &["x1", "x2"]);
            let z: Vec<Complex64> = vec![c(1.0, 0.0); h.nrays()];
            // Homogeneous point over x: z with ∏ z_ρ^{⟨m,u_ρ⟩} = x^m.
            let mut z = z;
            for (r, ray) in h.fan.rays.iter().enumerate() {
                if ray.normal == vec![1, 0] { z[r] = c(xs[0], 0.0); }
                if ray.normal == vec![0, 1] { z[r] = c(xs[1], 0.0); }
            }
            let (g, s) = h.fan.normalize_to_chart(sigma, &z).unwrap();
            let f = h.chart_polynomial(sigma).unwrap();
            let fs = f.evaluate(&s).unwrap();
            let chi = character_chi_l(&h.fan, &g);
            let px = p.evaluate(&[xs[0], xs[1]]).unwrap();
            let pz = h.evaluate(&z).unwrap();
            prop_assert!((pz.re - px).abs() <= 1e-9 * (1.0 + px.abs()));
            prop_assert!((fs - chi * pz).norm() <= 1e-9 * (1.0 + fs.norm()));
            prop_assert!(chi.re > 0.0 && chi.im.abs() <= 1e-12 * chi.re);
        }
    }
}
