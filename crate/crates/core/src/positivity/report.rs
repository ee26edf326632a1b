//! The full pipeline from a polynomial to a positivity report.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::powers::{find_k0, fully_positive_on, FullPositivity, K0Outcome, K0Search, TERM_BUDGET};
use super::{check_pos1, check_pos2, check_pos3, positive_on_orthant, Status, Verdict};
use crate::analysis::{analyze_charts, AnalysisReport};
use crate::fan::{FanError, NormalFan};
use crate::homogenize::{homogenize, HomogenizedPolynomial};
use crate::laurent::LaurentPolynomial;
use crate::parser::format_with;
use crate::polytope::{newton_polytope, LatticePolytope, NonSmoothVertex, PolytopeError};
use crate::sampling::SamplerConfig;

/// Sample cap for the convexity checks inside `analyze`.
const ANALYSIS_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeOptions {
    pub kmax: u32,
    /// Cap on the lattice points of `kΦ` examined by the power search.
    pub budget: usize,
    pub sampler: SamplerConfig,
    /// Run the convexity checks on every chart.
    pub analysis: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { kmax: 20, budget: TERM_BUDGET, sampler: SamplerConfig::default(), analysis: true }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    /// The input is outside the domain of the checks.
    #[error("{reason}")]
    Rejected { reason: String, witness: Option<NonSmoothVertex> },
    #[error("internal error: {0}")]
    Internal(String),
}

impl AnalyzeError {
    fn rejected(reason: impl ToString) -> Self {
        AnalyzeError::Rejected { reason: reason.to_string(), witness: None }
    }
}

impl From<PolytopeError> for AnalyzeError {
    fn from(e: PolytopeError) -> Self {
        AnalyzeError::rejected(e)
    }
}

/// A refutation from the positivity checks alongside a found `k₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conflict {
    pub check: String,
    pub k0: u32,
    pub equality: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub variables: Vec<String>,
    pub polynomial: String,
    pub polytope: LatticePolytope,
    pub lattice_points: usize,
    pub smooth: bool,
    pub fan: NormalFan,
    pub homogenized: HomogenizedPolynomial,
    pub fully_positive: FullPositivity,
    pub pos1: Verdict,
    pub pos2: Verdict,
    pub pos3: Verdict,
    pub orthant: Verdict,
    pub k0: K0Search,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisReport>,
    pub conflicts: Vec<Conflict>,
    pub notes: Vec<String>,
    /// Wall-clock time per stage; not part of the serialized report.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

struct Clock {
    last: Instant,
    out: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Clock { last: Instant::now(), out: Vec::new() }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.out.push(StageTiming { stage, seconds: (now - self.last).as_secs_f64() });
        self.last = now;
    }
}

fn conflicts(k0: &K0Search, checks: &[(&str, &Verdict)]) -> Vec<Conflict> {
    let K0Outcome::FoundAt(k) = k0.outcome else { return Vec::new() };
    checks
        .iter()
        .filter(|(_, v)| v.status == Status::CounterexampleFound)
        .map(|(name, v)| {
            let w = v.witness.as_ref().expect("counterexample carries a witness");
            Conflict {
                check: name.to_string(),
                k0: k,
                equality: w.equality,
                detail: format!("CONFLICT: {name} refuted at cone {:?} while powers from {k} are fully positive", w.cone),
            }
        })
        .collect()
}

/// Runs every stage on `p`. Points in `vars` name the coordinates in the
/// report only.
pub fn analyze(p: &LaurentPolynomial, vars: &[String], opts: &AnalyzeOptions) -> Result<PositivityReport, AnalyzeError> {
    let mut clock = Clock::new();
    let poly = newton_polytope(p)?;
    poly.require_full()?;
    clock.lap("polytope");
    if let Err(v) = poly.check_smooth()? {
        let det = v.determinant.map_or_else(|| "undefined".to_string(), |d| d.to_string());
        return Err(AnalyzeError::Rejected {
            reason: format!("polytope is not smooth at vertex {} (determinant {det})", v.vertex),
            witness: Some(v),
        });
    }
    let fan = NormalFan::build(&poly).map_err(|e| match e {
        FanError::NonSmooth(v) => AnalyzeError::Rejected { reason: FanError::NonSmooth(v.clone()).to_string(), witness: Some(v) },
        FanError::Polytope(e) => AnalyzeError::rejected(e),
        e => AnalyzeError::Internal(e.to_string()),
    })?;
    clock.lap("fan");
    let h = homogenize(p, &poly, &fan).map_err(|e| AnalyzeError::Internal(e.to_string()))?;
    clock.lap("homogenize");
    let points = poly.lattice_points();
    let fully_positive = fully_positive_on(p, &points);
    clock.lap("fully_positive");
    let cfg = &opts.sampler;
    let pos1 = check_pos1(&h);
    clock.lap("pos1");
    let pos2 = check_pos2(&h, cfg);
    clock.lap("pos2");
    let pos3 = check_pos3(&h, cfg);
    clock.lap("pos3");
    let orthant = positive_on_orthant(&h, cfg);
    clock.lap("orthant");
    let k0 = find_k0(p, opts.kmax, opts.budget)?;
    clock.lap("k0");
    let analysis = opts.analysis.then(|| {
        let small = SamplerConfig {
            sample_count: cfg.sample_count.min(ANALYSIS_SAMPLES),
            restart_count: cfg.restart_count.min(8),
            ..cfg.clone()
        };
        analyze_charts(&h, &small)
    });
    clock.lap("analysis");

    let checks = [("pos1", &pos1), ("pos2", &pos2), ("pos3", &pos3), ("orthant", &orthant)];
    let conflicts = conflicts(&k0, &checks);
    let mut notes = Vec::new();
    if checks.iter().all(|(_, v)| v.status == Status::CertifiedTrue) {
        if let K0Outcome::NoneUpTo(k) = k0.outcome {
            notes.push(format!("all checks certified but no stable power up to {k}; raise kmax"));
        }
    }
    if let Some(k) = k0.budget_exceeded_at {
        notes.push(format!("power search stopped at k = {k}: lattice point budget exceeded"));
    }
    if !k0.non_monotone.is_empty() {
        notes.push(format!("fully positive powers followed by failing ones at k = {:?}", k0.non_monotone));
    }
    Ok(PositivityReport {
        variables: vars.to_vec(),
        polynomial: format_with(p, vars),
        lattice_points: points.len(),
        smooth: true,
        polytope: poly,
        fan,
        homogenized: h,
        fully_positive,
        pos1,
        pos2,
        pos3,
        orthant,
        k0,
        analysis,
        conflicts,
        notes,
        timings: clock.out,
    })
}
