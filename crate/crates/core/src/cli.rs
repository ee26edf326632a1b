//! Command-line front end. Every command prints one JSON document on stdout.
//!
//! Exit codes: 0 on success, 2 when the input is rejected, 1 on an internal
//! error.

use std::ffi::OsString;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::lattice_span_check;
use crate::fan::NormalFan;
use crate::homogenize::homogenize;
use crate::laurent::{format_rational, LaurentPolynomial};
use crate::markov::{self, PolyMatrix};
use crate::parser::{format_with, infer_variables, parse, ExprSource};
use crate::polytope::newton_polytope;
use crate::positivity::{analyze, is_fully_positive, AnalyzeError, AnalyzeOptions, TERM_BUDGET};
use crate::sampling::{SamplerConfig, SamplingMode};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "toricpos";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "toricpos", version, about = "Eventual full positivity of Laurent polynomial powers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline: polytope, fan, positivity checks and power search.
    Analyze(AnalyzeArgs),
    /// Coefficients of p^k and whether they are fully positive.
    Powers {
        #[command(flatten)]
        input: Input,
        /// Power to expand.
        k: Option<u32>,
        /// Power to expand, for use with `--family`.
        #[arg(long, conflicts_with = "k")]
        power: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Vertices, facets and smoothness of the Newton polytope.
    Polytope {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
    },
    /// Rays and maximal cones of the normal fan.
    Fan {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
    },
    /// Homogenized polynomial and its chart restrictions.
    Homogenize {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
    },
    /// Digraph predicates and spectral radius of a polynomial matrix.
    Markov(MarkovArgs),
}

#[derive(Debug, Args)]
struct Input {
    /// Laurent polynomial, e.g. "(1+x1)^4 - 7*x1^2".
    #[arg(required_unless_present = "family")]
    expr: Option<String>,
    /// Comma-separated variable order; inferred from the expression when absent.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Built-in family instead of an expression (only `plambda`).
    #[arg(long, value_parser = ["plambda"], conflicts_with = "expr")]
    family: Option<String>,
    #[arg(long, default_value_t = 2)]
    ell: u32,
    #[arg(long, default_value = "7")]
    lambda1: String,
    #[arg(long, default_value = "7")]
    lambda2: String,
}

#[derive(Debug, Args)]
struct Output {
    /// Indented JSON.
    #[arg(long, conflicts_with = "json")]
    pretty: bool,
    /// Compact JSON (the default).
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 20)]
    kmax: u32,
    /// Cap on lattice points of kΦ in the power search.
    #[arg(long, default_value_t = TERM_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Sample in the affine charts (the default).
    #[arg(long, conflicts_with = "ambient")]
    chart_only: bool,
    /// Sample in homogeneous coordinates over all rays.
    #[arg(long)]
    ambient: bool,
    /// Skip the convexity checks.
    #[arg(long)]
    no_analysis: bool,
    /// Search the orthant without the t/(1-t) substitution.
    #[arg(long)]
    no_compactify: bool,
    /// Add wall-clock time per stage (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct MarkovArgs {
    /// JSON file holding a square 2-D array of expression strings.
    #[arg(long)]
    matrix: String,
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Compare the spectral radius with this polynomial at sampled points.
    #[arg(long)]
    check_beta: Option<String>,
    /// Evaluate the spectral radius at this point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    out: Output,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Rejection {
    value: Value,
    message: String,
}

impl Rejection {
    fn new(kind: &str, message: impl ToString) -> Self {
        let message = message.to_string();
        Rejection { value: json!({ "kind": kind, "message": message }), message }
    }
}

type Run = Result<Envelope, (Envelope, Rejection)>;

struct Envelope {
    command: &'static str,
    input: Value,
    seed: Option<u64>,
    config: Value,
    result: Value,
    timing: Option<Value>,
    pretty: bool,
}

impl Envelope {
    fn new(command: &'static str, input: Value, pretty: bool) -> Self {
        Envelope { command, input, seed: None, config: Value::Null, result: Value::Null, timing: None, pretty }
    }

    fn render(&self, error: Option<&Value>) -> String {
        let mut doc = serde_json::Map::new();
        doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
        doc.insert("tool".into(), json!(TOOL));
        doc.insert("version".into(), json!(VERSION));
        doc.insert("command".into(), json!(self.command));
        doc.insert("input".into(), self.input.clone());
        if let Some(s) = self.seed {
            doc.insert("seed".into(), json!(s));
        }
        if !self.config.is_null() {
            doc.insert("config".into(), self.config.clone());
        }
        match error {
            Some(e) => doc.insert("error".into(), e.clone()),
            None => doc.insert("result".into(), self.result.clone()),
        };
        if let Some(t) = &self.timing {
            doc.insert("timing".into(), t.clone());
        }
        let doc = Value::Object(doc);
        let mut s = if self.pretty {
            serde_json::to_string_pretty(&doc)
        } else {
            serde_json::to_string(&doc)
        }
        .expect("JSON values serialize");
        s.push('\n');
        s
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// `∏_{i=1,2} [(1+x_i)^{2ℓ} − λ_i x_i^ℓ]` in `x1, x2`, with its source text.
pub fn plambda(ell: u32, lambda1: &str, lambda2: &str) -> Result<(LaurentPolynomial, String), crate::parser::ParseError> {
    let factor = |i: u32, l: &str| format!("((1+x{i})^{} - ({l})*x{i}^{ell})", 2 * ell);
    let text = format!("{}*{}", factor(1, lambda1), factor(2, lambda2));
    let p = parse(&ExprSource::new(text.clone(), &["x1", "x2"]))?;
    Ok((p, text))
}

struct Parsed {
    p: LaurentPolynomial,
    vars: Vec<String>,
    input: Value,
}

fn read_input(input: &Input) -> Result<Parsed, (Value, Rejection)> {
    let (text, src) = match (&input.family, &input.expr) {
        (Some(_), _) => {
            let (_, text) = plambda(input.ell, &input.lambda1, &input.lambda2)
                .map_err(|e| (json!({ "family": "plambda" }), Rejection::new("parse", e)))?;
            let src = ExprSource::new(text.clone(), &["x1", "x2"]);
            (text, src)
        }
        (None, Some(text)) => {
            let src = match &input.vars {
                Some(v) => ExprSource::new(text.clone(), &v.iter().map(String::as_str).collect::<Vec<_>>()),
                None => ExprSource::inferred(text.clone()),
            };
            (text.clone(), src)
        }
        (None, None) => unreachable!("clap requires an expression or a family"),
    };
    let mut value = json!({ "expression": text, "variables": src.variable_order });
    if input.family.is_some() {
        value["family"] = json!({ "name": "plambda", "ell": input.ell, "lambda1": input.lambda1, "lambda2": input.lambda2 });
    }
    match parse(&src) {
        Ok(p) => Ok(Parsed { p, vars: src.variable_order, input: value }),
        Err(e) => {
            let mut r = Rejection::new("parse", &e);
            r.value["offset"] = json!(e.offset);
            Err((value, r))
        }
    }
}

macro_rules! parsed_or_reject {
    ($input:expr, $command:expr, $pretty:expr) => {
        match read_input($input) {
            Ok(p) => p,
            Err((value, r)) => return Err((Envelope::new($command, value, $pretty), r)),
        }
    };
}

fn run_analyze(a: &AnalyzeArgs) -> Run {
    let start = Instant::now();
    let parsed = parsed_or_reject!(&a.input, "analyze", a.out.pretty);
    let mut env = Envelope::new("analyze", parsed.input.clone(), a.out.pretty);
    let sampler = SamplerConfig {
        sample_count: a.samples,
        restart_count: a.restarts,
        eps: a.eps,
        compactify: !a.no_compactify,
        seed: a.seed,
        mode: if a.ambient { SamplingMode::Ambient } else { SamplingMode::Chart },
    };
    if !(a.eps > 0.0) {
        return Err((env, Rejection::new("config", "eps must be positive")));
    }
    let opts = AnalyzeOptions { kmax: a.kmax.max(1), budget: a.budget, sampler, analysis: !a.no_analysis };
    env.seed = Some(a.seed);
    env.config = to_value(&opts);
    match analyze(&parsed.p, &parsed.vars, &opts) {
        Ok(report) => {
            if a.timing {
                let mut stages = to_value(&report.timings);
                let total = start.elapsed().as_secs_f64();
                stages = json!({ "stages": stages, "total_seconds": total });
                env.timing = Some(stages);
            }
            env.result = to_value(&report);
            Ok(env)
        }
        Err(AnalyzeError::Rejected { reason, witness }) => {
            let mut r = Rejection::new("rejected", &reason);
            if let Some(w) = witness {
                r.value["witness"] = to_value(&w);
            }
            Err((env, r))
        }
        Err(e @ AnalyzeError::Internal(_)) => panic!("{e}"),
    }
}

fn run_powers(input: &Input, k: u32, out: &Output) -> Run {
    let parsed = parsed_or_reject!(input, "powers", out.pretty);
    let mut env = Envelope::new("powers", parsed.input.clone(), out.pretty);
    if parsed.p.is_zero() {
        return Err((env, Rejection::new("rejected", "the zero polynomial has no Newton polytope")));
    }
    let q = parsed.p.pow(k);
    let fp = is_fully_positive(&q).map_err(|e| (Envelope::new("powers", parsed.input.clone(), out.pretty), Rejection::new("rejected", e)))?;
    let coefficients: Vec<Value> =
        q.terms().map(|(m, c)| json!({ "exponent": m.0, "coefficient": format_rational(c) })).collect();
    env.result = json!({
        "k": k,
        "polynomial": format_with(&q, &parsed.vars),
        "terms": q.len(),
        "coefficients": coefficients,
        "fully_positive": fp.fully_positive,
        "lattice_points": fp.lattice_points,
        "failure_count": fp.failure_count,
        "first_failure": to_value(&fp.first_failure),
    });
    Ok(env)
}

fn run_polytope(input: &Input, out: &Output) -> Run {
    let parsed = parsed_or_reject!(input, "polytope", out.pretty);
    let mut env = Envelope::new("polytope", parsed.input.clone(), out.pretty);
    let poly = match newton_polytope(&parsed.p) {
        Ok(p) => p,
        Err(e) => return Err((env, Rejection::new("rejected", e))),
    };
    let smooth = if poly.is_full_dimensional() {
        match poly.check_smooth() {
            Ok(Ok(())) => json!({ "smooth": true }),
            Ok(Err(w)) => json!({ "smooth": false, "witness": to_value(&w) }),
            Err(e) => json!({ "smooth": false, "error": e.to_string() }),
        }
    } else {
        json!({ "smooth": Value::Null })
    };
    env.result = json!({
        "polytope": to_value(&poly),
        "affine_dimension": poly.affine_dimension(),
        "full_dimensional": poly.is_full_dimensional(),
        "lattice_points": poly.lattice_points().len(),
        "smoothness": smooth,
    });
    Ok(env)
}

fn fan_of(parsed: &Parsed) -> Result<(crate::polytope::LatticePolytope, NormalFan), Rejection> {
    let poly = newton_polytope(&parsed.p).map_err(|e| Rejection::new("rejected", e))?;
    poly.require_full().map_err(|e| Rejection::new("rejected", e))?;
    let fan = NormalFan::build(&poly).map_err(|e| {
        let mut r = Rejection::new("rejected", &e);
        if let crate::fan::FanError::NonSmooth(w) = &e {
            r.value["witness"] = to_value(w);
        }
        r
    })?;
    Ok((poly, fan))
}

fn run_fan(input: &Input, out: &Output) -> Run {
    let parsed = parsed_or_reject!(input, "fan", out.pretty);
    let mut env = Envelope::new("fan", parsed.input.clone(), out.pretty);
    let (_, fan) = match fan_of(&parsed) {
        Ok(f) => f,
        Err(r) => return Err((env, r)),
    };
    let e_sigma: Vec<Vec<i64>> = (0..fan.cones.len()).map(|s| fan.e_sigma(s).expect("cone index in range")).collect();
    env.result = json!({
        "fan": to_value(&fan),
        "nrays": fan.nrays(),
        "ncones": fan.cones.len(),
        "e_sigma": e_sigma,
        "relation_lattice": fan.relation_lattice().basis,
    });
    Ok(env)
}

fn run_homogenize(input: &Input, out: &Output) -> Run {
    let parsed = parsed_or_reject!(input, "homogenize", out.pretty);
    let mut env = Envelope::new("homogenize", parsed.input.clone(), out.pretty);
    let (poly, fan) = match fan_of(&parsed) {
        Ok(f) => f,
        Err(r) => return Err((env, r)),
    };
    let h = match homogenize(&parsed.p, &poly, &fan) {
        Ok(h) => h,
        Err(e) => return Err((env, Rejection::new("rejected", e))),
    };
    let rays: Vec<String> = (0..h.nrays()).map(|r| format!("z{r}")).collect();
    let charts: Vec<Value> = (0..fan.cones.len())
        .map(|sigma| {
            let f = h.chart_polynomial(sigma).expect("cone index in range");
            let names: Vec<String> = fan.cones[sigma].rays.iter().map(|r| format!("s{r}")).collect();
            json!({
                "cone": sigma,
                "rays": fan.cones[sigma].rays,
                "polynomial": format_with(&f, &names),
                "lattice_span": lattice_span_check(&f),
            })
        })
        .collect();
    env.result = json!({
        "rays": to_value(&fan.rays),
        "polynomial": format_with(&h.as_polynomial(), &rays),
        "terms": to_value(&h),
        "charts": charts,
    });
    Ok(env)
}

fn run_markov(a: &MarkovArgs) -> Run {
    let mut input = json!({ "matrix": a.matrix });
    let reject = |input: &Value, r: Rejection| Err((Envelope::new("markov", input.clone(), a.out.pretty), r));
    let text = match std::fs::read_to_string(&a.matrix) {
        Ok(t) => t,
        Err(e) => return reject(&input, Rejection::new("io", format!("{}: {e}", a.matrix))),
    };
    let grid: Vec<Vec<String>> = match serde_json::from_str(&text) {
        Ok(g) => g,
        Err(e) => return reject(&input, Rejection::new("rejected", format!("matrix file: {e}"))),
    };
    let vars = a.vars.clone().unwrap_or_else(|| {
        let all = grid.iter().flatten().cloned().collect::<Vec<_>>().join(" + ");
        let mut v = infer_variables(&all);
        if let Some(b) = &a.check_beta {
            v.extend(infer_variables(b));
            v = infer_variables(&v.join(" + "));
        }
        v
    });
    input["entries"] = json!(grid);
    input["variables"] = json!(vars);
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let m = match PolyMatrix::parse(&grid, &names) {
        Ok(m) => m,
        Err(e) => return reject(&input, Rejection::new("rejected", e)),
    };
    let beta_target = match &a.check_beta {
        Some(b) => match parse(&ExprSource::new(b.clone(), &names)) {
            Ok(p) => Some(p),
            Err(e) => return reject(&input, Rejection::new("parse", e)),
        },
        None => None,
    };
    let mut env = Envelope::new("markov", input.clone(), a.out.pretty);
    let irreducible = markov::is_irreducible(&m);
    let mut result = json!({
        "size": m.size(),
        "nvars": m.nvars(),
        "digraph": m.digraph(),
        "irreducible": irreducible,
        "aperiodic": if irreducible { json!(markov::is_aperiodic(&m)) } else { Value::Null },
        "convention": "edges are the symbolically nonzero entries",
    });
    if let Some(x) = &a.at {
        match markov::spectral_radius_at(&m, x) {
            Ok(r) => result["spectral_radius"] = json!({ "point": x, "value": r }),
            Err(e) => return reject(&input, Rejection::new("rejected", e)),
        }
    }
    if let Some(p) = beta_target {
        env.seed = Some(a.seed);
        env.config = json!({ "samples": a.samples, "tol": a.tol });
        let points = markov::sample_points(m.nvars(), a.samples, a.seed);
        match markov::verify_beta_equals(&m, &p, &points, a.tol) {
            Ok(v) => result["beta_check"] = to_value(&v),
            Err(e) => return reject(&input, Rejection::new("rejected", e)),
        }
    }
    env.result = result;
    Ok(env)
}

fn dispatch(cli: &Cli) -> Run {
    match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Powers { input, k, power, out } => run_powers(input, power.or(*k).unwrap_or(1), out),
        Command::Polytope { input, out } => run_polytope(input, out),
        Command::Fan { input, out } => run_fan(input, out),
        Command::Homogenize { input, out } => run_homogenize(input, out),
        Command::Markov(a) => run_markov(a),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match panic::catch_unwind(AssertUnwindSafe(|| dispatch(&cli))) {
        Ok(Ok(env)) => Outcome { code: 0, stdout: env.render(None), stderr: String::new() },
        Ok(Err((env, r))) => Outcome { code: 2, stdout: env.render(Some(&r.value)), stderr: format!("error: {}\n", r.message) },
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            let doc = json!({ "schema_version": SCHEMA_VERSION, "tool": TOOL, "version": VERSION,
                              "error": { "kind": "internal", "message": msg } });
            Outcome { code: 1, stdout: format!("{doc}\n"), stderr: format!("internal error: {msg}\n") }
        }
    }
}

/// Runs with the process arguments, writes the streams and returns the exit code.
pub fn main() -> i32 {
    let out = run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}
