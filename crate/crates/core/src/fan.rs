//! Normal fan of a smooth lattice polytope, the group `G` acting on the
//! homogeneous coordinates, and chart normalization.
//!
//! Rays follow the facet order of the polytope. A maximal cone is stored as
//! the increasing list of ray indices whose facets contain its vertex. Cones
//! themselves are ordered by vertex.
//!
//! `G` is represented only through the relation lattice
//! `{b ∈ ℤ^{Σ(1)} : Σ b_ρ u_ρ = 0}`. Its elements are `g_ρ = exp(Σ_j c_j b_j[ρ])`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::intlin;
use crate::laurent::{rational_to_f64, ExponentVector};
use crate::polytope::{LatticePolytope, NonSmoothVertex, PolytopeError};

/// Angle tolerance, in radians, of the unitary-orbit test.
pub const ORBIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FanError {
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("polytope is not smooth at vertex {}", .0.vertex)]
    NonSmooth(NonSmoothVertex),
    #[error("class group has torsion (invariant factors {0:?})")]
    TorsionClassGroup(Vec<i64>),
    #[error("no maximal cone with index {0}")]
    BadCone(usize),
    #[error("vector has {got} coordinates, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coordinate {ray} vanishes off the cone")]
    ChartPrecondition { ray: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ray {
    pub index: usize,
    pub normal: Vec<i64>,
    pub offset: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxCone {
    pub rays: Vec<usize>,
    pub vertex: ExponentVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalFan {
    pub n: usize,
    pub rays: Vec<Ray>,
    pub cones: Vec<MaxCone>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationLattice {
    pub basis: Vec<Vec<i64>>,
}

impl RelationLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `log g_ρ = Σ_j params_j · basis_j[ρ]`.
    pub fn log_element<T>(&self, params: &[T], nrays: usize) -> Vec<T>
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let mut out = vec![T::default(); nrays];
        for (c, b) in params.iter().zip(&self.basis) {
            for (o, &bi) in out.iter_mut().zip(b) {
                *o = *o + *c * bi as f64;
            }
        }
        out
    }
}

/// Verdict of the unitary-orbit membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orbit {
    Yes,
    No,
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitTest {
    pub verdict: Orbit,
    /// Distance, in radians, from solvability of the angle congruence.
    pub residual: f64,
}

/// Rejects fans whose ray-normal matrix has a nontrivial cokernel torsion.
pub fn check_torsion_free(normals: &[Vec<i64>]) -> Result<(), FanError> {
    let d = intlin::smith_diagonal(normals);
    if d.iter().all(|x| x == &num_bigint::BigInt::from(1)) {
        Ok(())
    } else {
        Err(FanError::TorsionClassGroup(
            d.iter().map(|x| num_traits::ToPrimitive::to_i64(x).unwrap_or(i64::MAX)).collect(),
        ))
    }
}

impl NormalFan {
    pub fn build(p: &LatticePolytope) -> Result<Self, FanError> {
        p.require_full()?;
        if let Err(w) = p.check_smooth()? {
            return Err(FanError::NonSmooth(w));
        }
        let rays: Vec<Ray> = p
            .facets()
            .iter()
            .enumerate()
            .map(|(index, f)| Ray { index, normal: f.normal.clone(), offset: f.offset })
            .collect();
        let cones = p
            .vertices()
            .iter()
            .map(|v| MaxCone { rays: p.facets_at(v), vertex: v.clone() })
            .collect();
        let fan = NormalFan { n: p.nvars(), rays, cones };
        check_torsion_free(&fan.normal_matrix())?;
        Ok(fan)
    }

    pub fn nrays(&self) -> usize {
        self.rays.len()
    }

    /// Rows `u_ρ`.
    pub fn normal_matrix(&self) -> Vec<Vec<i64>> {
        self.rays.iter().map(|r| r.normal.clone()).collect()
    }

    pub fn offsets(&self) -> Vec<i64> {
        self.rays.iter().map(|r| r.offset).collect()
    }

    pub fn cone(&self, sigma: usize) -> Result<&MaxCone, FanError> {
        self.cones.get(sigma).ok_or(FanError::BadCone(sigma))
    }

    /// Index of the cone whose vertex is `v`.
    pub fn cone_of_vertex(&self, v: &ExponentVector) -> Option<usize> {
        self.cones.iter().position(|c| &c.vertex == v)
    }

    /// The 0/1 point with zeros exactly on `σ(1)`.
    pub fn e_sigma(&self, sigma: usize) -> Result<Vec<i64>, FanError> {
        let c = self.cone(sigma)?;
        Ok((0..self.nrays()).map(|r| i64::from(!c.rays.contains(&r))).collect())
    }

    /// Membership in `Z(Σ)` given which coordinates vanish.
    pub fn in_irrelevant_set_by<F: Fn(usize) -> bool>(&self, is_zero: F) -> bool {
        self.cones
            .iter()
            .all(|c| (0..self.nrays()).any(|r| !c.rays.contains(&r) && is_zero(r)))
    }

    pub fn in_irrelevant_set(&self, z: &[Complex64]) -> Result<bool, FanError> {
        self.check_len(z.len())?;
        Ok(self.in_irrelevant_set_by(|r| z[r] == Complex64::new(0.0, 0.0)))
    }

    fn check_len(&self, got: usize) -> Result<(), FanError> {
        if got != self.nrays() {
            return Err(FanError::LengthMismatch { expected: self.nrays(), got });
        }
        Ok(())
    }

    /// Integer kernel of `Uᵀ`, i.e. all `b` with `Σ b_ρ u_ρ = 0`.
    pub fn relation_lattice(&self) -> RelationLattice {
        let ut = intlin::transpose(&self.normal_matrix());
        RelationLattice { basis: intlin::integer_kernel(&ut, self.nrays()) }
    }

    /// `φ_σ(s)`: `s` on `σ(1)` in cone order, one elsewhere.
    pub fn phi_sigma<T: Clone>(&self, sigma: usize, s: &[T], one: T) -> Result<Vec<T>, FanError> {
        let c = self.cone(sigma)?;
        if s.len() != c.rays.len() {
            return Err(FanError::LengthMismatch { expected: c.rays.len(), got: s.len() });
        }
        let mut out = vec![one; self.nrays()];
        for (k, &r) in c.rays.iter().enumerate() {
            out[r] = s[k].clone();
        }
        Ok(out)
    }

    /// Finds `g ∈ G` with `(g·z)_ρ = 1` off `σ(1)` and returns `(g, s)`
    /// where `s` is the restriction of `g·z` to `σ(1)`.
    ///
    /// With `A` the columns `u_ρ` for `ρ ∈ σ(1)` and `B` the remaining
    /// columns, `log g = -log z` off the cone and `-A⁻¹ B log g_off` on it.
    pub fn normalize_to_chart(
        &self,
        sigma: usize,
        z: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>), FanError> {
        self.check_len(z.len())?;
        let c = self.cone(sigma)?;
        let mut logs = vec![Complex64::new(0.0, 0.0); self.nrays()];
        for r in 0..self.nrays() {
            if c.rays.contains(&r) {
                continue;
            }
            if z[r] == Complex64::new(0.0, 0.0) {
                return Err(FanError::ChartPrecondition { ray: r });
            }
            logs[r] = -z[r].ln();
        }
        // b = -Σ_{ρ∉σ} log g_ρ u_ρ; solve A x = b.
        let mut b = vec![Complex64::new(0.0, 0.0); self.n];
        for r in 0..self.nrays() {
            if c.rays.contains(&r) {
                continue;
            }
            for (bi, &u) in b.iter_mut().zip(&self.rays[r].normal) {
                *bi -= logs[r] * u as f64;
            }
        }
        let a: Vec<Vec<i64>> =
            (0..self.n).map(|i| c.rays.iter().map(|&r| self.rays[r].normal[i]).collect()).collect();
        let inv = intlin::rational_inverse(&a).expect("smooth cone is unimodular");
        for (k, &r) in c.rays.iter().enumerate() {
            let mut x = Complex64::new(0.0, 0.0);
            for (q, bi) in inv[k].iter().zip(&b) {
                x += bi * rational_to_f64(q);
            }
            logs[r] = x;
        }
        let g: Vec<Complex64> = logs.iter().map(|l| l.exp()).collect();
        let s = c.rays.iter().map(|&r| g[r] * z[r]).collect();
        Ok((g, s))
    }

    /// Decides whether `z = g·x` with `g ∈ G ∩ U(1)^{Σ(1)}` and `x ≥ 0`.
    ///
    /// Angles are taken on the nonzero coordinates; zero coordinates leave
    /// their angle free. With `y = Σ θ_ρ u_ρ / 2π` over the nonzero ones and
    /// `Q` a basis of the integer vectors orthogonal to the normals of the
    /// zero coordinates, solvability is `Q y ∈ ℤ^k`.
    pub fn unitary_orbit_test(&self, z: &[Complex64]) -> Result<OrbitTest, FanError> {
        self.check_len(z.len())?;
        let zero = Complex64::new(0.0, 0.0);
        let mut y = vec![0.0f64; self.n];
        let mut free: Vec<Vec<i64>> = Vec::new();
        for (r, ray) in self.rays.iter().enumerate() {
            if z[r] == zero {
                free.push(ray.normal.clone());
                continue;
            }
            let theta = z[r].arg() / (2.0 * PI);
            for (yi, &u) in y.iter_mut().zip(&ray.normal) {
                *yi += theta * u as f64;
            }
        }
        let q: Vec<Vec<i64>> = if free.is_empty() {
            (0..self.n).map(|i| (0..self.n).map(|j| i64::from(i == j)).collect()).collect()
        } else {
            intlin::integer_kernel(&free, self.n)
        };
        let mut worst = 0.0f64;
        for row in &q {
            let t: f64 = row.iter().zip(&y).map(|(&a, b)| a as f64 * b).sum();
            worst = worst.max((t - t.round()).abs());
        }
        let residual = 2.0 * PI * worst;
        let verdict = if residual < ORBIT_EPS {
            Orbit::Yes
        } else if residual <= 10.0 * ORBIT_EPS {
            Orbit::Borderline
        } else {
            Orbit::No
        };
        Ok(OrbitTest { verdict, residual })
    }

    pub fn in_unitary_orbit_of_orthant(&self, z: &[Complex64]) -> Result<Orbit, FanError> {
        Ok(self.unitary_orbit_test(z)?.verdict)
    }

    /// Exact orbit test for points whose phases are quarter turns:
    /// `quarters[ρ]` is `Some(q)` for `z_ρ = r_ρ i^q` with `r_ρ > 0` and
    /// `None` for `z_ρ = 0`. Here `4y = Σ q_ρ u_ρ` is an integer vector.
    pub fn quarter_orbit_exact(&self, quarters: &[Option<u8>]) -> Result<bool, FanError> {
        self.check_len(quarters.len())?;
        let mut y4 = vec![0i64; self.n];
        let mut free: Vec<Vec<i64>> = Vec::new();
        for (ray, q) in self.rays.iter().zip(quarters) {
            match q {
                None => free.push(ray.normal.clone()),
                Some(q) => {
                    for (yi, &u) in y4.iter_mut().zip(&ray.normal) {
                        *yi += i64::from(q % 4) * u;
                    }
                }
            }
        }
        let q: Vec<Vec<i64>> = if free.is_empty() {
            (0..self.n).map(|i| (0..self.n).map(|j| i64::from(i == j)).collect()).collect()
        } else {
            intlin::integer_kernel(&free, self.n)
        };
        Ok(q.iter().all(|row| row.iter().zip(&y4).map(|(a, b)| a * b).sum::<i64>().rem_euclid(4) == 0))
    }
}

pub fn build_normal_fan(p: &LatticePolytope) -> Result<NormalFan, FanError> {
    NormalFan::build(p)
}

/// `g_ρ = exp(Σ_j params_j basis_j[ρ])`, a point of `G ∩ (ℝ₊^{Σ(1)})°`.
pub fn positive_group_element(lattice: &RelationLattice, params: &[f64], nrays: usize) -> Vec<f64> {
    lattice.log_element(params, nrays).into_iter().map(f64::exp).collect()
}

/// `g_ρ = exp(i Σ_j angles_j basis_j[ρ])`, a point of `G ∩ U(1)^{Σ(1)}`.
pub fn unitary_group_element(lattice: &RelationLattice, angles: &[f64], nrays: usize) -> Vec<Complex64> {
    lattice
        .log_element(angles, nrays)
        .into_iter()
        .map(|t| Complex64::from_polar(1.0, t))
        .collect()
}

/// `g_ρ = exp(Σ_j c_j basis_j[ρ])` for complex parameters.
pub fn complex_group_element(lattice: &RelationLattice, params: &[Complex64], nrays: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); nrays];
    for (c, b) in params.iter().zip(&lattice.basis) {
        for (o, &bi) in out.iter_mut().zip(b) {
            *o += c * bi as f64;
        }
    }
    out.into_iter().map(|l| l.exp()).collect()
}
