//! Chart sampling against sampling in homogeneous coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toricpos::fan::NormalFan;
use toricpos::homogenize::homogenize;
use toricpos::laurent::{int, ExponentVector, LaurentPolynomial};
use toricpos::polytope::newton_polytope;
use toricpos::positivity::{check_pos2, check_pos3, positive_on_orthant, Status, Verdict};
use toricpos::sampling::{SamplerConfig, SamplingMode};

fn random_smooth(rng: &mut ChaCha8Rng) -> Option<toricpos::homogenize::HomogenizedPolynomial> {
    let n = rng.gen_range(1..=2);
    let k = rng.gen_range(n + 1..=6);
    let terms: Vec<(ExponentVector, _)> = (0..k)
        .map(|_| {
            let m = ExponentVector((0..n).map(|_| rng.gen_range(-2..=2)).collect());
            let c = if rng.gen_bool(0.7) { rng.gen_range(1..=6) } else { -rng.gen_range(1..=3) };
            (m, int(c))
        })
        .collect();
    let p = LaurentPolynomial::from_terms(n, terms);
    let poly = newton_polytope(&p).ok()?;
    if !poly.is_full_dimensional() || !poly.is_smooth() {
        return None;
    }
    let fan = NormalFan::build(&poly).ok()?;
    homogenize(&p, &poly, &fan).ok()
}

fn refuted(v: &Verdict) -> bool {
    v.status == Status::CounterexampleFound
}

#[test]
fn modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut cases, mut agree, mut total) = (0, 0, 0);
    while cases < 40 {
        let Some(h) = random_smooth(&mut rng) else { continue };
        cases += 1;
        let chart = SamplerConfig::with_budget(2000, 8).seeded(cases);
        let ambient = SamplerConfig { mode: SamplingMode::Ambient, ..chart.clone() };
        let pairs = [
            (check_pos2(&h, &chart), check_pos2(&h, &ambient)),
            (positive_on_orthant(&h, &chart), positive_on_orthant(&h, &ambient)),
            (check_pos3(&h, &chart), check_pos3(&h, &ambient)),
        ];
        for (c, a) in &pairs {
            // A chart certificate is a proof; ambient sampling must not contradict it.
            assert!(!(c.status == Status::CertifiedTrue && refuted(a)), "{:?}", h.terms);
            total += 1;
            agree += usize::from(refuted(c) == refuted(a));
        }
    }
    eprintln!("agreement {agree}/{total}");
    assert!(agree * 10 >= total * 9, "agreement {agree}/{total}");
}
