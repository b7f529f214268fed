//! Batch front end: JSON in, JSON out, exit code carries the verdict.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use sdeinstein::builder::{assemble_metric, derived_scalars, invariant_gamma_u, SolutionData};
use sdeinstein::exactfield::{parse_q, q, q_to_string, ExactPoint, Poly, PointSampler, QJson, Q};
use sdeinstein::pdesolve::{
    characteristics_solve, classify_connection, connection_normal_form, gauge_fix, k0_solve, lccne_canonical,
    residual_eqn, to_connection_pair, CharGrid, ExpPoly, InitialCurve, NormalCase, NormalFormData, PlaneConnection,
    QuasiLinearPDE, SectionPair,
};
use sdeinstein::tensorcalc::{curvature, det4, ChartMetric};
use sdeinstein::verify::{
    all_passed, classify_points, nonhomogeneity_witness, run_suite, Bundle, Check, CheckOptions, Mode,
};
use sdeinstein::Error;

#[derive(Parser)]
#[command(name = "sdeinstein", version, about = "Build and verify self-dual Einstein metrics of neutral signature")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble the metric from solution data.
    Build(BuildArgs),
    /// Run verification checks on a metric or solution.
    Verify(VerifyArgs),
    /// Produce solutions: explicit families, characteristics, gauge fixing.
    Solve(SolveArgs),
    /// Petrov verdicts at points, or the trichotomy for a plane connection.
    Classify(ClassifyArgs),
    /// The fibrewise invariant and a non-homogeneity witness.
    Invariant(InvariantArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    mode: Mode,
    /// Sample count, a JSON file of points, or `y1,y2,x1,x2;...`.
    #[arg(long)]
    points: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "K", allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    r_override: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated subset of the checks; all by default.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    orientation: Option<i8>,
    #[arg(long, allow_hyphen_values = true)]
    r_override: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Lccne,
    K0,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Characteristics,
    Gauge,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// pde.json for the characteristics solver, or the initial curve and
    /// grid for gauge fixing.
    #[arg(long)]
    pde: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<String>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    extent: Option<f64>,
    /// Finite-difference spacing for grid residuals.
    #[arg(long, default_value_t = 1e-2)]
    h: f64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    orientation: Option<i8>,
    /// Grid spacing for connection inputs.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// Half-width of the grid for connection inputs.
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
    /// Zero threshold for the sign of tr R̄².
    #[arg(long, default_value_t = 1e-12)]
    zero_tol: f64,
}

#[derive(Args)]
struct InvariantArgs {
    #[command(flatten)]
    common: Common,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EqnResidualNonzero(_) => 3,
            Error::TangentInitialCurve(_)
            | Error::ZeroCrossing(..)
            | Error::CharacteristicCrossing(_)
            | Error::DegenerateCharacteristic(_) => 4,
            Error::BothOrientationsFail | Error::NotEinstein(_) | Error::NotTypeIII(_) => 1,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

type CliResult<T> = Result<T, Failure>;

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| malformed(format!("malformed {what}: {e}")))
}

fn input(c: &Common) -> CliResult<Value> {
    read_json(c.input.as_deref().ok_or_else(|| malformed("--input is required"))?)
}

fn flag_q(s: &Option<String>) -> CliResult<Option<Q>> {
    s.as_deref().map(parse_q).transpose().map_err(Failure::from)
}

fn emit(c: &Common, v: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialise") + "\n";
    match &c.out {
        Some(p) => fs::write(p, text).map_err(|e| malformed(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn points(c: &Common) -> CliResult<Vec<ExactPoint>> {
    let Some(spec) = c.points.as_deref() else {
        return Ok(PointSampler::new(c.seed).points(10));
    };
    if let Ok(n) = spec.parse::<usize>() {
        return Ok(PointSampler::new(c.seed).points(n));
    }
    if Path::new(spec).is_file() {
        let raw: Vec<[QJson; 4]> = from_value(read_json(Path::new(spec))?, "point list")?;
        return raw.iter().map(|p| Ok([p[0].to_q()?, p[1].to_q()?, p[2].to_q()?, p[3].to_q()?])).collect();
    }
    spec.split(';')
        .map(|p| {
            let v: Vec<Q> = p.split(',').map(parse_q).collect::<Result<_, _>>()?;
            <[Q; 4]>::try_from(v).map_err(|_| malformed(format!("a point needs four coordinates: {p:?}")))
        })
        .collect()
}

#[allow(clippy::large_enum_variant)]
enum Input {
    Solution(SolutionData),
    Metric(Box<ChartMetric>, Option<Q>),
    Connection(Value),
}

fn classify_input(v: Value) -> CliResult<Input> {
    if v.get("components").is_some() {
        return Ok(Input::Solution(from_value(v, "solution")?));
    }
    if v.get("Gamma").is_some() || v.get("case").is_some() {
        return Ok(Input::Connection(v));
    }
    let k = v.get("K").cloned().map(|k| from_value::<QJson>(k, "K")).transpose()?.map(|k| k.to_q()).transpose()?;
    let m = match v.get("metric") {
        Some(m) => m.clone(),
        None => v,
    };
    Ok(Input::Metric(Box::new(from_value(m, "metric")?), k))
}

/// `K` for a bare metric: the flag, the file, or `scal/12` when constant.
fn metric_bundle(m: ChartMetric, file_k: Option<Q>, flag: Option<Q>) -> CliResult<Bundle> {
    if let Some(k) = flag.or(file_k) {
        return Ok(Bundle::new(m, k)?);
    }
    let curv = curvature(&m)?;
    let k = curv
        .scalar
        .numer()
        .as_constant()
        .filter(|_| curv.scalar.denom().as_constant().is_some())
        .map(|s| s / q(12) / curv.scalar.denom().as_constant().expect("checked"))
        .ok_or_else(|| malformed("scalar curvature is not constant; pass --K"))?;
    Ok(Bundle::new(m, k)?)
}

fn bundle(c: &Common, r_override: &Option<String>) -> CliResult<Bundle> {
    match classify_input(input(c)?)? {
        Input::Solution(mut sol) => {
            if let Some(r) = flag_q(r_override)? {
                sol = sol.with_r_override(Poly::constant(r));
            }
            Ok(Bundle::from_solution(&sol)?)
        }
        Input::Metric(m, k) => metric_bundle(*m, k, flag_q(&c.k)?),
        Input::Connection(_) => Err(malformed("expected a solution or metric, got a connection")),
    }
}

fn cmd_build(a: &BuildArgs) -> CliResult<bool> {
    let mut sol: SolutionData = match classify_input(input(&a.common)?)? {
        Input::Solution(s) => s,
        _ => return Err(malformed("build needs solution data")),
    };
    if let Some(r) = flag_q(&a.r_override)? {
        sol = sol.with_r_override(Poly::constant(r));
    }
    let m = assemble_metric(&sol)?;
    let ds = derived_scalars(&sol)?;
    let out = json!({
        "K": q_to_string(&sol.k),
        "metric": m,
        "det": det4(&m.g).to_string(),
        "derived": { "s": ds.s.to_string(), "r": ds.r.to_string(), "f": ds.f.to_string() },
    });
    emit(&a.common, &out)?;
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<bool> {
    let b = bundle(&a.common, &a.r_override)?;
    let checks: Vec<Check> = if a.checks.is_empty() {
        Check::ALL.to_vec()
    } else {
        a.checks.iter().map(|s| s.trim().parse()).collect::<Result<_, _>>()?
    };
    let opts = CheckOptions {
        mode: a.common.mode,
        points: points(&a.common)?,
        tol: a.common.tol,
        orientation: a.orientation,
        ..CheckOptions::default()
    };
    let reports = run_suite(&b, &checks, &opts)?;
    emit(&a.common, &serde_json::to_value(&reports).expect("reports serialise"))?;
    Ok(all_passed(&reports))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PdeFile {
    #[serde(default)]
    rho: Option<Poly>,
    #[serde(default)]
    sigma: Option<Poly>,
    #[serde(default)]
    chi: Option<Poly>,
    initial_curve: InitialCurve,
    #[serde(default)]
    step: Option<f64>,
    #[serde(default)]
    extent: Option<f64>,
}

impl PdeFile {
    fn grid(&self, a: &SolveArgs) -> CharGrid {
        CharGrid {
            step: a.step.or(self.step).unwrap_or(1e-3),
            extent: a.extent.or(self.extent).unwrap_or(0.5),
        }
    }
}

/// One slot of a connection or section: plain polynomial terms, or a list
/// of `{coef, exp}` pairs standing for `Σ coef·e^exp`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ExpPolyJson {
    Exp(Vec<ExpTerm>),
    Plain(Poly),
}

#[derive(Deserialize)]
struct ExpTerm {
    coef: Poly,
    exp: Poly,
}

impl ExpPolyJson {
    fn build(self) -> ExpPoly {
        match self {
            ExpPolyJson::Plain(p) => ExpPoly::from(p),
            ExpPolyJson::Exp(ts) => {
                ts.into_iter().fold(ExpPoly::zero(), |acc, t| &acc + &ExpPoly::term(t.coef, t.exp))
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ConnectionFile {
    #[serde(rename = "Gamma", default)]
    gamma: Option<[[[ExpPolyJson; 2]; 2]; 2]>,
    #[serde(default)]
    case: Option<String>,
    #[serde(default)]
    psi: Poly,
    #[serde(default)]
    chi: Poly,
    #[serde(default)]
    p: Poly,
    #[serde(default)]
    c: Option<[ExpPolyJson; 2]>,
    #[serde(default)]
    q: Option<[ExpPolyJson; 2]>,
}

fn is_polynomial(e: &ExpPoly) -> bool {
    e.as_poly().is_some()
}

fn parse_connection(v: Value, mode: Mode) -> CliResult<(PlaneConnection, Option<SectionPair>)> {
    let f: ConnectionFile = from_value(v, "connection")?;
    let conn = match (f.gamma, f.case.as_deref()) {
        (Some(g), _) => PlaneConnection { gamma: g.map(|m| m.map(|r| r.map(ExpPolyJson::build))) },
        (None, Some(case)) => {
            let case = match case {
                "Ia" => NormalCase::Ia,
                "Ib" => NormalCase::Ib,
                "Ic" => NormalCase::Ic,
                other => return Err(Error::UnknownCase(other.into()).into()),
            };
            connection_normal_form(case, &NormalFormData { psi: f.psi, chi: f.chi, p: f.p })?
        }
        (None, None) => return Err(malformed("connection needs \"Gamma\" or \"case\"")),
    };
    let sections = match (f.c, f.q) {
        (Some(c), Some(q)) => Some(SectionPair { c: c.map(ExpPolyJson::build), q: q.map(ExpPolyJson::build) }),
        (None, None) => None,
        _ => return Err(malformed("give both sections \"c\" and \"q\" or neither")),
    };
    let transcendental = conn.gamma.iter().flatten().flatten().any(|e| !is_polynomial(e))
        || sections.iter().flat_map(|s| s.c.iter().chain(s.q.iter())).any(|e| !is_polynomial(e));
    if transcendental && mode == Mode::Exact {
        return Err(malformed("input has exponential terms; rerun with --mode numeric"));
    }
    Ok((conn, sections))
}

fn cmd_solve(a: &SolveArgs) -> CliResult<bool> {
    let k = flag_q(&a.common.k)?;
    if let Some(family) = a.family {
        let sol = match family {
            Family::Lccne => lccne_canonical(k.unwrap_or_else(|| q(1))),
            Family::K0 => {
                if k.as_ref().is_some_and(|k| *k != q(0)) {
                    return Err(malformed("the k0 family has K = 0"));
                }
                let chi = Poly::constant(flag_q(&a.chi)?.unwrap_or_else(|| q(0)));
                let id = [[Poly::one(), Poly::zero()], [Poly::zero(), Poly::one()]];
                k0_solve(&id, &Poly::zero(), &chi, &[Poly::zero(), Poly::zero()])?.solution
            }
        };
        let (e1, e2) = residual_eqn(&sol);
        if !(e1.is_zero() && e2.is_zero()) {
            return Err(Error::EqnResidualNonzero(format!("{e1}; {e2}")).into());
        }
        emit(&a.common, &serde_json::to_value(&sol).expect("solution serialises"))?;
        return Ok(true);
    }
    let pde_path = a.pde.as_deref().ok_or_else(|| malformed("solve needs --family or --pde"))?;
    let pde: PdeFile = from_value(read_json(pde_path)?, "pde")?;
    let grid = pde.grid(a);
    match a.method.unwrap_or(Method::Characteristics) {
        Method::Characteristics => {
            let (Some(rho), Some(sigma), Some(chi)) = (&pde.rho, &pde.sigma, &pde.chi) else {
                return Err(malformed("pde needs rho, sigma and chi"));
            };
            let eq = QuasiLinearPDE::from_polys(rho, sigma, chi);
            let sol = characteristics_solve(&eq, &pde.initial_curve, &grid)?;
            let (res, n) = sol.pde_residual(&eq, a.h);
            let ok = res <= a.common.tol;
            emit(
                &a.common,
                &json!({ "solution": sol, "pdeResidual": res, "residualPoints": n, "covered": sol.covered(), "withinTolerance": ok }),
            )?;
            Ok(ok)
        }
        Method::Gauge => {
            let (conn, sp, k) = match classify_input(input(&a.common)?)? {
                Input::Solution(sol) => {
                    let (c, s) = to_connection_pair(&sol);
                    (c, s, sol.k)
                }
                Input::Connection(v) => {
                    let (c, s) = parse_connection(v, a.common.mode)?;
                    let s = s.ok_or_else(|| malformed("gauge fixing needs sections \"c\" and \"q\""))?;
                    (c, s, k.ok_or_else(|| malformed("gauge fixing a connection needs --K"))?)
                }
                Input::Metric(..) => return Err(malformed("gauge fixing needs a solution or connection")),
            };
            let g = gauge_fix(&conn, &sp, &k, &pde.initial_curve, &grid, a.h)?;
            let ok = g.scalar_residual_after <= a.common.tol;
            emit(&a.common, &serde_json::to_value(&g).expect("gauge result serialises"))?;
            Ok(ok)
        }
    }
}

fn cmd_classify(a: &ClassifyArgs) -> CliResult<bool> {
    let c = &a.common;
    match classify_input(input(c)?)? {
        Input::Connection(v) => {
            let (conn, _) = parse_connection(v, c.mode)?;
            let n = (a.extent / a.step).round() as i64;
            let ys: Vec<[f64; 2]> = (-n..=n)
                .flat_map(|i| (-n..=n).map(move |j| [i as f64 * a.step, j as f64 * a.step]))
                .collect();
            let classes = classify_connection(&conn, &ys, a.zero_tol);
            emit(c, &json!({ "connection": classes }))?;
            Ok(true)
        }
        other => {
            let b = match other {
                Input::Solution(sol) => Bundle::from_solution(&sol)?,
                Input::Metric(m, k) => metric_bundle(*m, k, flag_q(&c.k)?)?,
                Input::Connection(_) => unreachable!(),
            };
            let (o, verdicts) = classify_points(&b, &points(c)?, a.orientation)?;
            emit(c, &json!({ "orientation": o, "points": verdicts }))?;
            Ok(true)
        }
    }
}

fn cmd_invariant(a: &InvariantArgs) -> CliResult<bool> {
    let c = &a.common;
    let sol = match classify_input(input(c)?)? {
        Input::Solution(s) => s,
        _ => return Err(malformed("the invariant needs solution data")),
    };
    let b = Bundle::from_solution(&sol)?;
    let opts = CheckOptions { points: points(c)?, ..CheckOptions::default() };
    let r = nonhomogeneity_witness(&b, &sol, &opts)?;
    let ok = r.status != sdeinstein::verify::Status::Fail;
    emit(c, &json!({ "gammaU4": invariant_gamma_u(&sol).to_string(), "report": r }))?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Classify(a) => cmd_classify(a),
        Cmd::Invariant(a) => cmd_invariant(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
