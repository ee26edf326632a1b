//! End-to-end acceptance checks. Each criterion prints one line; the binary
//! exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toricpos::analysis::{hessian_log_fsharp, j_matrix};
use toricpos::cli::plambda;
use toricpos::fan::{complex_group_element, NormalFan};
use toricpos::homogenize::{homogenize, HomogenizedPolynomial};
use toricpos::laurent::{int, ExponentVector, GaussianRational, LaurentPolynomial};
use toricpos::markov::{sample_points, spectral_radius_at, verify_beta_equals, BetaStatus, PolyMatrix};
use toricpos::parser::parse_with;
use toricpos::polytope::{newton_polytope, LatticePolytope};
use toricpos::positivity::{
    analyze, check_pos1, check_pos2, check_pos3, find_k0, is_fully_positive, positive_on_orthant, AnalyzeOptions,
    K0Outcome, Status, TERM_BUDGET,
};
use toricpos::sampling::SamplerConfig;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Test-side oracles.

/// Dense product of integer polynomials in two variables.
fn dense_mul(a: &BTreeMap<(i64, i64), i128>, b: &BTreeMap<(i64, i64), i128>) -> BTreeMap<(i64, i64), i128> {
    let mut out = BTreeMap::new();
    for (&(i, j), &c) in a {
        for (&(k, l), &d) in b {
            *out.entry((i + k, j + l)).or_insert(0) += c * d;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// `∏_{i=1,2} [(1+x_i)^4 − λ x_i^2]` expanded by binomial coefficients.
fn family_dense(lambda: i128) -> BTreeMap<(i64, i64), i128> {
    let binom = [1i128, 4, 6, 4, 1];
    let mut out = BTreeMap::new();
    for a in 0..5 {
        for b in 0..5 {
            let ca = binom[a] - if a == 2 { lambda } else { 0 };
            let cb = binom[b] - if b == 2 { lambda } else { 0 };
            if ca * cb != 0 {
                out.insert((a as i64, b as i64), ca * cb);
            }
        }
    }
    out
}

/// Andrew's monotone chain, strict vertices only.
fn hull_vertices_2d(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn vertices_oracle(n: usize, support: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    if n == 1 {
        let lo = support.iter().map(|m| m[0]).min().unwrap();
        let hi = support.iter().map(|m| m[0]).max().unwrap();
        return [vec![lo], vec![hi]].into_iter().collect();
    }
    let pts: Vec<(i64, i64)> = support.iter().map(|m| (m[0], m[1])).collect();
    hull_vertices_2d(&pts).into_iter().map(|(a, b)| vec![a, b]).collect()
}

/// Lattice points in the convex polygon with counterclockwise vertices `v`.
fn polygon_points(v: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let (x0, x1) = (v.iter().map(|p| p.0).min().unwrap(), v.iter().map(|p| p.0).max().unwrap());
    let (y0, y1) = (v.iter().map(|p| p.1).min().unwrap(), v.iter().map(|p| p.1).max().unwrap());
    let mut out = Vec::new();
    for x in x0..=x1 {
        for y in y0..=y1 {
            let inside = (0..v.len()).all(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0) >= 0
            });
            if inside {
                out.push((x, y));
            }
        }
    }
    out
}

fn poly_from(n: usize, terms: &[(Vec<i64>, i64)]) -> LaurentPolynomial {
    LaurentPolynomial::from_terms(n, terms.iter().map(|(m, c)| (ExponentVector(m.clone()), int(*c))))
}

fn setup(p: &LaurentPolynomial) -> Option<(LatticePolytope, HomogenizedPolynomial)> {
    let poly = newton_polytope(p).ok()?;
    if !poly.is_full_dimensional() || !poly.is_smooth() {
        return None;
    }
    let fan = NormalFan::build(&poly).ok()?;
    let h = homogenize(p, &poly, &fan).ok()?;
    Some((poly, h))
}

/// A random polynomial with positive coefficients at every lattice point of
/// a smooth full-dimensional hull.
fn random_fully_positive(rng: &mut ChaCha8Rng) -> LaurentPolynomial {
    loop {
        let n = rng.gen_range(1..=2);
        let k = rng.gen_range(n + 1..=5);
        let pts: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let lattice: Vec<Vec<i64>> = if n == 1 {
            let lo = pts.iter().map(|m| m[0]).min().unwrap();
            let hi = pts.iter().map(|m| m[0]).max().unwrap();
            (lo..=hi).map(|x| vec![x]).collect()
        } else {
            let v = hull_vertices_2d(&pts.iter().map(|m| (m[0], m[1])).collect::<Vec<_>>());
            if v.len() < 3 {
                continue;
            }
            polygon_points(&v).into_iter().map(|(a, b)| vec![a, b]).collect()
        };
        if lattice.len() < 2 {
            continue;
        }
        let terms: Vec<(Vec<i64>, i64)> = lattice.into_iter().map(|m| (m, rng.gen_range(1..=9))).collect();
        let p = poly_from(n, &terms);
        if setup(&p).is_some() {
            return p;
        }
    }
}

fn p77() -> LaurentPolynomial {
    plambda(2, "7", "7").unwrap().0
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let p = p77();
    let dense = family_dense(7);
    let lib: BTreeMap<(i64, i64), i128> =
        p.terms().map(|(m, c)| ((m.0[0], m.0[1]), c.to_integer().to_i128().unwrap())).collect();
    ensure(lib == dense, || "expansion differs from the binomial oracle".into())?;
    let vars = vec!["x1".to_string(), "x2".to_string()];
    let opts = AnalyzeOptions { sampler: SamplerConfig::default().seeded(7), ..AnalyzeOptions::default() };
    let r = analyze(&p, &vars, &opts).map_err(|e| e.to_string())?;
    let verts: BTreeSet<Vec<i64>> = r.polytope.vertices().iter().map(|v| v.0.clone()).collect();
    let square: BTreeSet<Vec<i64>> = [[0, 0], [0, 4], [4, 0], [4, 4]].iter().map(|v| v.to_vec()).collect();
    ensure(verts == square, || format!("vertices {verts:?}"))?;
    ensure(!r.fully_positive.fully_positive, || "reported fully positive".into())?;
    let w = r.fully_positive.first_failure.as_ref().ok_or("no failing lattice point")?;
    ensure(w.m.0 == vec![2, 0] && w.coefficient == "-1", || format!("first failure {w:?}"))?;
    ensure(dense[&(2, 0)] == -1, || "oracle coefficient at (2,0) is not -1".into())?;
    ensure(r.pos1.status == Status::CertifiedTrue, || format!("pos1 {:?}", r.pos1.status))?;
    let corner_oracle: Vec<String> = r.fan.cones.iter().map(|c| dense[&(c.vertex.0[0], c.vertex.0[1])].to_string()).collect();
    ensure(r.pos1.values == corner_oracle && corner_oracle.iter().all(|v| v == "1"), || {
        format!("pos1 values {:?} vs oracle {corner_oracle:?}", r.pos1.values)
    })?;
    ensure(r.pos2.status != Status::CounterexampleFound, || "pos2 falsified".into())?;
    ensure(r.pos3.status != Status::CounterexampleFound, || "pos3 falsified".into())?;
    let K0Outcome::FoundAt(k0) = r.k0.outcome else { return Err(format!("k0 {:?}", r.k0.outcome)) };
    ensure(k0 <= 20, || format!("k0 = {k0}"))?;
    // Brute-force check of the threshold: p^k factorizes, so test q^k in one variable.
    let q = |k: u32| {
        let mut acc: BTreeMap<(i64, i64), i128> = [((0, 0), 1)].into_iter().collect();
        let f: BTreeMap<(i64, i64), i128> = [(0, 1), (1, 4), (2, -1), (3, 4), (4, 1)].iter().map(|&(e, c)| ((e, 0), c)).collect();
        for _ in 0..k {
            acc = dense_mul(&acc, &f);
        }
        (0..=4 * k as i64).all(|e| acc.get(&(e, 0)).is_some_and(|c| *c > 0))
    };
    ensure(!q(k0 - 1) && (k0..=20).all(q), || format!("oracle disagrees with k0 = {k0}"))?;
    ensure(r.conflicts.is_empty(), || format!("conflicts {:?}", r.conflicts))?;
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!(
        "square [0,4]^2, c(2,0) = -1, pos1 values all 1, pos2 {:?}, pos3 {:?}, k0 = {k0}, {:.1}s",
        r.pos2.status,
        r.pos3.status,
        t.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = plambda(2, "8", "8").unwrap().0;
    let s = find_k0(&p, 8, TERM_BUDGET).map_err(|e| e.to_string())?;
    ensure(s.outcome == K0Outcome::NoneUpTo(8), || format!("{:?}", s.outcome))?;
    let base = family_dense(8);
    let mut acc = base.clone();
    for k in 1..=8u32 {
        let negative = acc.values().any(|&c| c < 0);
        ensure(negative && !s.bitmap[k as usize - 1], || format!("power {k} disagrees with the dense oracle"))?;
        acc = dense_mul(&acc, &base);
    }
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("NoneUpTo(8), every power 1..8 has a negative coefficient, {:.1}s", t.as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut accepted, mut tried, mut refuted) = (0, 0, 0);
    while accepted < 100 {
        tried += 1;
        let n = rng.gen_range(1..=2);
        let k = rng.gen_range(2..=8);
        let terms: Vec<(Vec<i64>, i64)> = (0..k)
            .map(|_| {
                let m = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
                let c = if rng.gen_bool(0.5) { rng.gen_range(1..=5) } else { -rng.gen_range(1..=5) };
                (m, c)
            })
            .collect();
        let p = poly_from(n, &terms);
        let Some((_, h)) = setup(&p) else { continue };
        accepted += 1;
        let support: Vec<Vec<i64>> = p.support_points().into_iter().map(|m| m.0).collect();
        let verts = vertices_oracle(n, &support);
        let oracle = verts.iter().all(|v| p.coefficient(&ExponentVector(v.clone())).is_positive());
        let v = check_pos1(&h);
        ensure(v.status != Status::Inconclusive, || "pos1 inconclusive".into())?;
        ensure((v.status == Status::CertifiedTrue) == oracle, || format!("disagreement on {p:?}"))?;
        let cone_vertices: BTreeSet<Vec<i64>> = h.fan.cones.iter().map(|c| c.vertex.0.clone()).collect();
        ensure(cone_vertices == verts, || format!("vertex sets differ on {p:?}"))?;
        for (c, value) in h.fan.cones.iter().zip(&v.values) {
            let expected = toricpos::laurent::format_rational(&p.coefficient(&c.vertex));
            ensure(&expected == value, || format!("value {value} at {:?}, expected {expected}", c.vertex))?;
        }
        refuted += usize::from(!oracle);
    }
    Ok(format!("100/100 agree ({refuted} refuted, {} candidates filtered)", tried - accepted))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut certified = [0usize; 3];
    for i in 0..50u64 {
        let p = random_fully_positive(&mut rng);
        let fp = is_fully_positive(&p).map_err(|e| e.to_string())?;
        ensure(fp.fully_positive, || format!("generator produced a non fully positive {p:?}"))?;
        let (_, h) = setup(&p).ok_or("setup failed")?;
        let cfg = SamplerConfig::with_budget(5000, 32).seeded(i);
        let verdicts = [check_pos2(&h, &cfg), check_pos3(&h, &cfg), positive_on_orthant(&h, &cfg)];
        for (j, v) in verdicts.iter().enumerate() {
            ensure(v.status != Status::CounterexampleFound, || format!("false refutation by check {j} on {p:?}"))?;
            certified[j] += usize::from(v.status == Status::CertifiedTrue);
        }
    }
    Ok(format!("no refutations; certified pos2 {}/50, pos3 {}/50, orthant {}/50", certified[0], certified[1], certified[2]))
}

/// `p̃(z)` from the fan data directly, with the absolute-value scale.
fn hom_eval(p: &LaurentPolynomial, fan: &NormalFan, z: &[Complex64]) -> (Complex64, f64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (m, c) in p.terms() {
        let mut t = Complex64::new(c.to_f64().unwrap(), 0.0);
        for (r, zr) in fan.rays.iter().zip(z) {
            let e: i64 = r.normal.iter().zip(&m.0).map(|(u, x)| u * x).sum::<i64>() + r.offset;
            t *= zr.powi(e as i32);
        }
        scale += t.norm();
        v += t;
    }
    (v, scale)
}

fn criterion_5() -> Outcome {
    let inputs = [
        ("((1+x1)^4-7*x1^2)*((1+x2)^4-7*x2^2)", vec!["x1", "x2"]),
        ("1 + x + y + x*y^2 - 3*x*y", vec!["x", "y"]),
        ("2 - x + x^3", vec!["x"]),
        ("x + y + x^-1 + y^-1 + x*y + x^-1*y^-1 - 2", vec!["x", "y"]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for (text, vars) in &inputs {
        let p = parse_with(text, vars).unwrap();
        let (_, h) = setup(&p).ok_or_else(|| format!("{text} rejected"))?;
        let fan = &h.fan;
        let lat = fan.relation_lattice();
        for _ in 0..1000 {
            let params: Vec<Complex64> = (0..lat.rank())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-3.2..3.2)))
                .collect();
            let g = complex_group_element(&lat, &params, fan.nrays());
            // Membership in G: ∑_ρ log g_ρ · u_ρ = 0.
            let logs = params_log(&lat, &params, fan.nrays());
            for i in 0..fan.n {
                let s: Complex64 = fan.rays.iter().zip(&logs).map(|(r, l)| l * r.normal[i] as f64).sum();
                ensure(s.norm() < 1e-12, || "group element off G".into())?;
            }
            let z: Vec<Complex64> = (0..fan.nrays())
                .map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let gz: Vec<Complex64> = g.iter().zip(&z).map(|(a, b)| a * b).collect();
            let chi: Complex64 = fan.rays.iter().zip(&g).map(|(r, gi)| gi.powi(r.offset as i32)).product();
            let (lhs, lscale) = hom_eval(&p, fan, &gz);
            let (pz, _) = hom_eval(&p, fan, &z);
            let residual = (lhs - chi * pz).norm() / lscale.max(1e-300);
            let lib = h.evaluate(&gz).map_err(|e| e.to_string())?;
            ensure((lib - lhs).norm() <= 1e-10 * lscale, || "library evaluation differs from the fan oracle".into())?;
            worst = worst.max(residual);
        }
    }
    ensure(worst <= 1e-9, || format!("worst residual {worst:e}"))?;
    Ok(format!("4 polynomials x 1000 pairs, worst relative residual {worst:.2e}"))
}

fn params_log(lat: &toricpos::fan::RelationLattice, params: &[Complex64], nrays: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); nrays];
    for (c, b) in params.iter().zip(&lat.basis) {
        for (o, &bi) in out.iter_mut().zip(b) {
            *o += c * bi as f64;
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_h, mut worst_fd) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        // J is unchanged by a monomial factor, so shift into the orthant.
        let g = random_fully_positive(&mut rng);
        let n = g.nvars();
        let lo: Vec<i64> = (0..n).map(|i| g.terms().map(|(m, _)| m.0[i]).min().unwrap()).collect();
        let f = LaurentPolynomial::from_terms(n, g.terms().map(|(m, c)| (ExponentVector(m.0.iter().zip(&lo).map(|(a, b)| a - b).collect()), c.clone())));
        let s: Vec<f64> = (0..n).map(|_| (rng.gen_range(-1.0f64..1.0) * 10f64.ln()).exp()).collect();
        let t: Vec<f64> = s.iter().map(|x| x.ln()).collect();
        let j = j_matrix(&f, &s).map_err(|e| e.to_string())?;
        let hm = hessian_log_fsharp(&f, &t).map_err(|e| e.to_string())?;
        // ln f(e^{t+d}) − ln f(e^t), computed as the log of a ratio.
        let f0 = f.eval_f64(&s).unwrap();
        let lr = |d: &[f64]| {
            let x: Vec<f64> = t.iter().zip(d).map(|(a, b)| (a + b).exp()).collect();
            (f.eval_f64(&x).unwrap() / f0).ln()
        };
        let h = 1e-4;
        let norm = j.entries.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        for a in 0..n {
            for b in 0..n {
                let mut d = vec![0.0; n];
                let mut at = |sa: f64, sb: f64| {
                    d.iter_mut().for_each(|x| *x = 0.0);
                    d[a] += sa * h;
                    d[b] += sb * h;
                    lr(&d)
                };
                let fd = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
                worst_h = worst_h.max((j.entries[a][b] - hm[a][b]).abs());
                worst_fd = worst_fd.max((j.entries[a][b] - fd).abs() / norm.max(f64::MIN_POSITIVE));
            }
        }
    }
    ensure(worst_h <= 1e-10, || format!("j vs hessian {worst_h:e}"))?;
    ensure(worst_fd <= 1e-6, || format!("j vs finite differences {worst_fd:e}"))?;
    Ok(format!("200 pairs, j-hessian {worst_h:.1e}, j-fd relative {worst_fd:.1e}"))
}

fn criterion_7() -> Outcome {
    let p = parse_with("1+x^2", &["x"]).unwrap();
    let (_, h) = setup(&p).ok_or("1+x^2 rejected")?;
    let v = check_pos3(&h, &SamplerConfig::default());
    ensure(v.status == Status::CounterexampleFound, || format!("status {:?}", v.status))?;
    let w = v.witness.as_ref().unwrap();
    let z: Vec<Complex64> = w.ambient_point.iter().map(GaussianRational::to_complex).collect();
    ensure(z.len() == 2, || "ambient point length".into())?;
    // G = {(t, t)}: z is equivalent to (1, −1) iff z₁ = −z₂ ≠ 0.
    let (a, b) = (&w.ambient_point[0], &w.ambient_point[1]);
    let sum = GaussianRational::new(&a.re + &b.re, &a.im + &b.im);
    ensure(sum.norm_sqr().is_zero() && !a.norm_sqr().is_zero(), || format!("witness {:?} not equivalent to (1,-1)", w.ambient_point))?;
    let (val, _) = hom_eval(&p, &h.fan, &z);
    let abs: Vec<Complex64> = z.iter().map(|x| Complex64::new(x.norm(), 0.0)).collect();
    let (reference, _) = hom_eval(&p, &h.fan, &abs);
    let ratio = val.norm() / reference.re;
    ensure((ratio - 1.0).abs() <= 1e-9, || format!("ratio {ratio}"))?;
    ensure(w.ratio.is_some_and(|r| (r - 1.0).abs() <= 1e-9), || format!("reported ratio {:?}", w.ratio))?;
    // Off the excluded set: not both zero, and z₁/z₂ is not a positive real.
    ensure(z.iter().any(|x| x.norm() > 0.0), || "witness in the irrelevant set".into())?;
    let q = z[0] / z[1];
    ensure(!(q.im == 0.0 && q.re > 0.0), || "witness in the unitary orbit of the orthant".into())?;
    Ok(format!("witness z = ({}, {}), ratio {ratio}, equality-type {}", w.ambient_point[0], w.ambient_point[1], w.equality))
}

fn criterion_8() -> Outcome {
    let square = LatticePolytope::hull(2, &[vec![0, 0], vec![4, 0], vec![0, 4], vec![4, 4]].into_iter().map(ExponentVector).collect::<Vec<_>>())
        .map_err(|e| e.to_string())?;
    ensure(square.is_smooth(), || "square rejected".into())?;
    for n in 1..=3usize {
        let mut pts = vec![ExponentVector::zeros(n)];
        pts.extend((0..n).map(|i| ExponentVector::unit(n, i)));
        let simplex = LatticePolytope::hull(n, &pts).map_err(|e| e.to_string())?;
        ensure(simplex.is_smooth(), || format!("simplex of dimension {n} rejected"))?;
    }
    let tri = LatticePolytope::hull(2, &[vec![0, 0], vec![2, 1], vec![1, 2]].into_iter().map(ExponentVector).collect::<Vec<_>>())
        .map_err(|e| e.to_string())?;
    let w = match tri.check_smooth().map_err(|e| e.to_string())? {
        Ok(()) => return Err("triangle accepted".into()),
        Err(w) => w,
    };
    // Edges at the origin are (2,1) and (1,2): determinant 2·2 − 1·1.
    let oracle = 2 * 2 - 1;
    ensure(w.vertex.0 == vec![0, 0] && w.determinant == Some(oracle), || format!("witness {w:?}"))?;
    Ok(format!("square and simplices accepted; triangle rejected at (0,0) with determinant {oracle}"))
}

fn criterion_9() -> Outcome {
    let p = parse_with("(1+x1)*(1+x2) + x1*x2^2", &["x1", "x2"]).unwrap();
    let (_, h) = setup(&p).ok_or("setup failed")?;
    let pt = h.as_polynomial();
    let mut worst = 0.0f64;
    for k in 1..=3u32 {
        let q = pt.pow(k);
        let a = PolyMatrix::new(vec![vec![q.clone()]]).map_err(|e| e.to_string())?;
        let points = sample_points(pt.nvars(), 100, u64::from(k));
        let v = verify_beta_equals(&a, &q, &points, 1e-10).map_err(|e| e.to_string())?;
        ensure(v.status == BetaStatus::Supported && v.points == 100, || format!("k = {k}: {v:?}"))?;
        worst = worst.max(v.max_relative_error);
    }
    let swap = PolyMatrix::parse(&[vec!["0".into(), "x".into()], vec!["1".into(), "0".into()]], &["x"]).map_err(|e| e.to_string())?;
    let r = spectral_radius_at(&swap, &[4.0]).map_err(|e| e.to_string())?;
    // Characteristic polynomial λ² − x.
    let oracle = 4.0f64.sqrt();
    ensure((r - oracle).abs() <= 1e-10, || format!("spectral radius {r}"))?;
    Ok(format!("1x1 powers k=1..3 agree to {worst:.1e} on 100 points; rho = {r}"))
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_toricpos");
    let runs = [
        vec!["analyze", "--family", "plambda", "--ell", "2", "--lambda1", "7", "--lambda2", "7", "--seed", "7"],
        vec!["analyze", "1 + x^2 + y - x*y", "--vars", "x,y", "--seed", "3", "--samples", "4000", "--ambient"],
    ];
    let mut bytes = 0;
    for args in &runs {
        let a = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        let b = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure(a.status.code() == Some(0), || format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr)))?;
        ensure(a.stdout == b.stdout, || format!("outputs differ for {args:?}"))?;
        serde_json::from_slice::<serde_json::Value>(&a.stdout).map_err(|e| e.to_string())?;
        bytes += a.stdout.len();
    }
    Ok(format!("2 configurations, byte-identical reports ({bytes} bytes)"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("two-variable family at lambda = 7", criterion_1),
        ("limiting family at lambda = 8", criterion_2),
        ("vertex check matches the coefficient oracle", criterion_3),
        ("fully positive inputs are never refuted", criterion_4),
        ("functional equation residual", criterion_5),
        ("J matrix consistency", criterion_6),
        ("modulus check refutes 1 + x^2", criterion_7),
        ("smoothness gate", criterion_8),
        ("1x1 spectral radius identity", criterion_9),
        ("deterministic reports", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
