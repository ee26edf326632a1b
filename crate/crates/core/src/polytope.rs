//! Exact lattice polytopes: convex hull, facet presentation, lattice points,
//! dilation and smoothness.
//!
//! A facet is stored as a primitive inward normal `u` and an offset `a` with
//! `⟨m, u⟩ ≥ -a` on the polytope and equality on the facet. Facets are kept
//! in descending lexicographic order on `(u, a)`; this order becomes the ray
//! order of the normal fan.
//!
//! The hull is built incrementally (beneath-beyond). When a point sees a set
//! of facets, every ridge between a visible and an invisible facet is coned
//! to the new point. Polytopes of lower affine dimension are computed in a
//! coordinate projection and lifted back together with their affine
//! equations, so lattice points remain available for them.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::intlin;
use crate::laurent::{ExponentVector, LaurentPolynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("the zero polynomial has no Newton polytope")]
    ZeroPolynomial,
    #[error("empty point set")]
    Empty,
    #[error("affine dimension {dim} < {n}")]
    NotFullDimensional { dim: usize, n: usize },
    #[error("{0} is not a vertex")]
    NotAVertex(ExponentVector),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dilation factor must be at least 1")]
    BadDilation,
}

/// Supporting half-space `⟨m, normal⟩ ≥ -offset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    /// `⟨m, u⟩ + a`, nonnegative on the polytope.
    pub fn slack(&self, m: &[i64]) -> i64 {
        dot(m, &self.normal) + self.offset
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        self.slack(m) == 0
    }
}

/// Vertex at which the polytope fails to be smooth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonSmoothVertex {
    pub vertex: ExponentVector,
    pub edge_directions: Vec<Vec<i64>>,
    /// Absolute determinant of the primitive edge directions; `None` when
    /// the vertex does not have exactly `n` edges.
    pub determinant: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticePolytope {
    n: usize,
    dim: usize,
    vertices: Vec<ExponentVector>,
    facets: Vec<Facet>,
    /// Affine equations `⟨m, u⟩ = -a` cutting out the affine hull; empty when
    /// full-dimensional.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    equations: Vec<Facet>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn sort_facets(f: &mut [Facet]) {
    f.sort_by(|x, y| y.cmp(x));
}

/// Affine rank of a point set (`-1` conventionally for the empty set is
/// reported as 0 here; callers never pass empty sets).
fn affine_rank(points: &[&Vec<i64>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let diffs: Vec<Vec<i64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    intlin::rank(&diffs)
}

/// Primitive normal of the hyperplane through `points`, if they span one.
fn hyperplane_normal(points: &[&Vec<i64>], d: usize) -> Option<Vec<i64>> {
    let diffs: Vec<Vec<i64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let ker = if diffs.is_empty() {
        intlin::integer_kernel(&[], d)
    } else {
        intlin::integer_kernel(&diffs, d)
    };
    (ker.len() == 1).then(|| intlin::primitive(&ker[0]))
}

struct HullFacet {
    facet: Facet,
    incident: BTreeSet<usize>,
}

/// Full-dimensional hull in `ℤ^d` of distinct points. Returns facets and the
/// indices of the vertices.
fn full_hull(pts: &[Vec<i64>], d: usize) -> (Vec<Facet>, Vec<usize>) {
    // Greedy affinely independent start.
    let mut simplex = vec![0usize];
    for i in 1..pts.len() {
        if simplex.len() == d + 1 {
            break;
        }
        let mut cand: Vec<&Vec<i64>> = simplex.iter().map(|&j| &pts[j]).collect();
        cand.push(&pts[i]);
        if affine_rank(&cand) == simplex.len() {
            simplex.push(i);
        }
    }
    assert_eq!(simplex.len(), d + 1, "full_hull needs a full-dimensional point set");
    // Interior point scaled by d+1.
    let mut centroid = vec![0i64; d];
    for &i in &simplex {
        for (c, x) in centroid.iter_mut().zip(&pts[i]) {
            *c += x;
        }
    }
    let scale = (d + 1) as i64;
    let orient = |normal: Vec<i64>, on: &Vec<i64>| -> Facet {
        let a = -dot(on, &normal);
        if dot(&centroid, &normal) + scale * a > 0 {
            Facet { normal, offset: a }
        } else {
            let normal: Vec<i64> = normal.iter().map(|x| -x).collect();
            Facet { offset: -dot(on, &normal), normal }
        }
    };

    let mut processed: Vec<usize> = simplex.clone();
    let mut facets: Vec<HullFacet> = Vec::new();
    for skip in 0..=d {
        let face: Vec<&Vec<i64>> =
            simplex.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &j)| &pts[j]).collect();
        let normal = hyperplane_normal(&face, d).expect("simplex facet");
        let facet = orient(normal, face[0]);
        let incident = simplex.iter().copied().filter(|&j| facet.contains(&pts[j])).collect();
        facets.push(HullFacet { facet, incident });
    }

    for q in 0..pts.len() {
        if simplex.contains(&q) {
            continue;
        }
        let p = &pts[q];
        let visible: Vec<bool> = facets.iter().map(|f| f.facet.slack(p) < 0).collect();
        if !visible.iter().any(|&v| v) {
            for f in facets.iter_mut() {
                if f.facet.contains(p) {
                    f.incident.insert(q);
                }
            }
            processed.push(q);
            continue;
        }
        let mut created: Vec<Facet> = Vec::new();
        for (i, fv) in facets.iter().enumerate() {
            if !visible[i] {
                continue;
            }
            for (j, fh) in facets.iter().enumerate() {
                if visible[j] {
                    continue;
                }
                let ridge: Vec<usize> = fv.incident.intersection(&fh.incident).copied().collect();
                if ridge.len() < d - 1 {
                    continue;
                }
                let ridge_pts: Vec<&Vec<i64>> = ridge.iter().map(|&k| &pts[k]).collect();
                let is_ridge = if d == 1 { ridge.is_empty() } else { affine_rank(&ridge_pts) == d - 2 };
                if !is_ridge {
                    continue;
                }
                let mut through = ridge_pts.clone();
                through.insert(0, p);
                let Some(normal) = hyperplane_normal(&through, d) else {
                    continue;
                };
                let f = orient(normal, p);
                if !created.contains(&f) {
                    created.push(f);
                }
            }
        }
        processed.push(q);
        let mut kept: Vec<HullFacet> =
            facets.into_iter().zip(&visible).filter(|(_, &v)| !v).map(|(f, _)| f).collect();
        for f in created {
            if let Some(existing) = kept.iter_mut().find(|k| k.facet == f) {
                existing.incident.insert(q);
                continue;
            }
            let incident = processed.iter().copied().filter(|&k| f.contains(&pts[k])).collect();
            kept.push(HullFacet { facet: f, incident });
        }
        facets = kept;
    }

    let normals_at = |k: usize| -> Vec<Vec<i64>> {
        facets.iter().filter(|f| f.incident.contains(&k)).map(|f| f.facet.normal.clone()).collect()
    };
    let vertices: Vec<usize> = (0..pts.len())
        .filter(|&k| {
            let ns = normals_at(k);
            !ns.is_empty() && intlin::rank(&ns) == d
        })
        .collect();
    let mut out: Vec<Facet> = facets.into_iter().map(|f| f.facet).collect();
    sort_facets(&mut out);
    out.dedup();
    (out, vertices)
}

impl LatticePolytope {
    /// Convex hull of a finite set of lattice points in `ℤ^n`.
    pub fn hull(n: usize, points: &[ExponentVector]) -> Result<Self, PolytopeError> {
        if points.is_empty() {
            return Err(PolytopeError::Empty);
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(PolytopeError::DimensionMismatch { expected: n, got: p.len() });
        }
        let set: BTreeSet<&ExponentVector> = points.iter().collect();
        let pts: Vec<Vec<i64>> = set.into_iter().map(|p| p.0.clone()).collect();
        let refs: Vec<&Vec<i64>> = pts.iter().collect();
        let dim = affine_rank(&refs);
        if dim == 0 {
            return Ok(LatticePolytope {
                n,
                dim,
                vertices: vec![ExponentVector(pts[0].clone())],
                facets: Vec::new(),
                equations: Self::point_equations(&pts[0]),
            });
        }
        if dim == n {
            let (facets, vix) = full_hull(&pts, n);
            let vertices = vix.into_iter().map(|k| ExponentVector(pts[k].clone())).collect();
            return Ok(LatticePolytope { n, dim, vertices, facets, equations: Vec::new() });
        }
        // Project onto `dim` coordinates on which the point set keeps its rank.
        let diffs: Vec<Vec<i64>> = pts[1..].iter().map(|p| sub(p, &pts[0])).collect();
        let coords = choose_coordinates(&diffs, n, dim);
        let proj: Vec<Vec<i64>> =
            pts.iter().map(|p| coords.iter().map(|&c| p[c]).collect()).collect();
        let (pf, vix) = full_hull(&proj, dim);
        let facets = pf
            .into_iter()
            .map(|f| {
                let mut normal = vec![0i64; n];
                for (k, &c) in coords.iter().enumerate() {
                    normal[c] = f.normal[k];
                }
                Facet { normal, offset: f.offset }
            })
            .collect();
        let equations = intlin::integer_kernel(&diffs, n)
            .into_iter()
            .map(|w| Facet { offset: -dot(&pts[0], &w), normal: w })
            .collect();
        let mut vertices: Vec<ExponentVector> =
            vix.into_iter().map(|k| ExponentVector(pts[k].clone())).collect();
        vertices.sort();
        Ok(LatticePolytope { n, dim, vertices, facets, equations })
    }

    fn point_equations(p: &[i64]) -> Vec<Facet> {
        (0..p.len())
            .map(|i| {
                let mut normal = vec![0; p.len()];
                normal[i] = 1;
                Facet { normal, offset: -p[i] }
            })
            .collect()
    }

    /// Rebuilds a full-dimensional polytope from a facet list by vertex
    /// enumeration over `n`-subsets of facets.
    pub fn from_facets(n: usize, facets: &[Facet]) -> Result<Self, PolytopeError> {
        let mut verts: BTreeSet<ExponentVector> = BTreeSet::new();
        let mut chosen = Vec::with_capacity(n);
        enumerate_subsets(facets.len(), n, 0, &mut chosen, &mut |idx| {
            let rows: Vec<Vec<i64>> = idx.iter().map(|&i| facets[i].normal.clone()).collect();
            let Some(inv) = intlin::rational_inverse(&rows) else {
                return;
            };
            let rhs: Vec<i64> = idx.iter().map(|&i| -facets[i].offset).collect();
            let mut v = Vec::with_capacity(n);
            for row in &inv {
                let x: num_rational::BigRational = row
                    .iter()
                    .zip(&rhs)
                    .map(|(a, &b)| a * num_rational::BigRational::from_integer(b.into()))
                    .sum();
                if !x.is_integer() {
                    return;
                }
                match num_traits::ToPrimitive::to_i64(x.numer()) {
                    Some(x) => v.push(x),
                    None => return,
                }
            }
            if facets.iter().all(|f| f.slack(&v) >= 0) {
                verts.insert(ExponentVector(v));
            }
        });
        let pts: Vec<ExponentVector> = verts.into_iter().collect();
        Self::hull(n, &pts)
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn affine_dimension(&self) -> usize {
        self.dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.n
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[ExponentVector] {
        &self.vertices
    }

    /// Facets in descending lexicographic order on `(u, a)`. For polytopes of
    /// lower dimension these are relative facets, valid on the affine hull.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn equations(&self) -> &[Facet] {
        &self.equations
    }

    /// The irredundant facet presentation; requires full dimension.
    pub fn facet_presentation(&self) -> Result<&[Facet], PolytopeError> {
        self.require_full()?;
        Ok(&self.facets)
    }

    pub fn require_full(&self) -> Result<(), PolytopeError> {
        if self.is_full_dimensional() {
            Ok(())
        } else {
            Err(PolytopeError::NotFullDimensional { dim: self.dim, n: self.n })
        }
    }

    pub fn contains(&self, m: &[i64]) -> bool {
        m.len() == self.n
            && self.facets.iter().all(|f| f.slack(m) >= 0)
            && self.equations.iter().all(|f| f.slack(m) == 0)
    }

    /// Coordinatewise bounds of the vertex set.
    pub fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = self.vertices[0].0.clone();
        let mut hi = lo.clone();
        for v in &self.vertices[1..] {
            for i in 0..self.n {
                lo[i] = lo[i].min(v.0[i]);
                hi[i] = hi[i].max(v.0[i]);
            }
        }
        (lo, hi)
    }

    /// All lattice points, by scanning the bounding box against the facets.
    pub fn lattice_points(&self) -> BTreeSet<ExponentVector> {
        let (lo, hi) = self.bounding_box();
        let mut out = BTreeSet::new();
        let mut cur = lo.clone();
        if self.n == 0 {
            out.insert(ExponentVector(Vec::new()));
            return out;
        }
        loop {
            if self.contains(&cur) {
                out.insert(ExponentVector(cur.clone()));
            }
            let mut i = 0;
            loop {
                if i == self.n {
                    return out;
                }
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
        }
    }

    /// `k · P`.
    pub fn dilate(&self, k: i64) -> Result<Self, PolytopeError> {
        if k < 1 {
            return Err(PolytopeError::BadDilation);
        }
        let scale = |f: &Facet| Facet { normal: f.normal.clone(), offset: f.offset * k };
        Ok(LatticePolytope {
            n: self.n,
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.scaled(k)).collect(),
            facets: self.facets.iter().map(scale).collect(),
            equations: self.equations.iter().map(scale).collect(),
        })
    }

    /// Indices of the facets through `v`.
    pub fn facets_at(&self, v: &ExponentVector) -> Vec<usize> {
        (0..self.facets.len()).filter(|&i| self.facets[i].contains(&v.0)).collect()
    }

    /// Primitive edge directions at a vertex, in lexicographic order.
    pub fn edge_directions(&self, v: &ExponentVector) -> Result<Vec<Vec<i64>>, PolytopeError> {
        self.require_full()?;
        if !self.vertices.contains(v) {
            return Err(PolytopeError::NotAVertex(v.clone()));
        }
        let at_v = self.facets_at(v);
        let mut dirs: Vec<Vec<i64>> = Vec::new();
        for w in &self.vertices {
            if w == v {
                continue;
            }
            let common: Vec<Vec<i64>> = at_v
                .iter()
                .filter(|&&i| self.facets[i].contains(&w.0))
                .map(|&i| self.facets[i].normal.clone())
                .collect();
            if intlin::rank(&common) == self.n - 1 {
                dirs.push(intlin::primitive(&sub(&w.0, &v.0)));
            }
        }
        dirs.sort();
        Ok(dirs)
    }

    /// For each edge at `v`, the first lattice point along it.
    pub fn vertex_edge_neighbors(&self, v: &ExponentVector) -> Result<Vec<ExponentVector>, PolytopeError> {
        let dirs = self.edge_directions(v)?;
        let mut out: Vec<ExponentVector> =
            dirs.iter().map(|d| ExponentVector(v.0.iter().zip(d).map(|(a, b)| a + b).collect())).collect();
        out.sort();
        Ok(out)
    }

    /// `Ok(())` when every vertex has `n` primitive edge directions with
    /// determinant ±1; otherwise the first offending vertex.
    pub fn check_smooth(&self) -> Result<Result<(), NonSmoothVertex>, PolytopeError> {
        self.require_full()?;
        for v in &self.vertices {
            let dirs = self.edge_directions(v)?;
            let determinant = (dirs.len() == self.n)
                .then(|| num_traits::ToPrimitive::to_i64(&num_traits::Signed::abs(&intlin::det(&dirs))).unwrap_or(i64::MAX));
            if determinant != Some(1) {
                return Ok(Err(NonSmoothVertex { vertex: v.clone(), edge_directions: dirs, determinant }));
            }
        }
        Ok(Ok(()))
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.check_smooth(), Ok(Ok(())))
    }
}

fn enumerate_subsets<F: FnMut(&[usize])>(
    total: usize,
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    f: &mut F,
) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for i in start..total {
        chosen.push(i);
        enumerate_subsets(total, k, i + 1, chosen, f);
        chosen.pop();
    }
}

fn choose_coordinates(diffs: &[Vec<i64>], n: usize, dim: usize) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut found = None;
    enumerate_subsets(n, dim, 0, &mut chosen, &mut |idx| {
        if found.is_some() {
            return;
        }
        let proj: Vec<Vec<i64>> = diffs.iter().map(|d| idx.iter().map(|&c| d[c]).collect()).collect();
        if intlin::rank(&proj) == dim {
            found = Some(idx.to_vec());
        }
    });
    found.expect("some coordinate projection keeps the rank")
}

/// Newton polytope of a nonzero polynomial.
pub fn newton_polytope(p: &LaurentPolynomial) -> Result<LatticePolytope, PolytopeError> {
    if p.is_zero() {
        return Err(PolytopeError::ZeroPolynomial);
    }
    LatticePolytope::hull(p.nvars(), &p.support_points())
}
