//! End-to-end checks on a constructed metric: Einstein condition,
//! self-duality and type III, the curvature identity in terms of the octuple
//! forms, curvature homogeneity, the strictly non-Walker property and the
//! non-homogeneity witness.
//!
//! Every check returns a [`CheckReport`]. A check that cannot run (missing
//! solution data, vanishing Weyl tensor, constant invariant) reports
//! `indeterminate` with the reason in `detail` rather than being skipped.

use std::fmt;
use std::str::FromStr;

use nalgebra::SMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::builder::{
    assemble_metric, derived_scalars, gamma_via_connection, htilde_frame, invariant_gamma_u, octuple_fields,
    SolutionData,
};
use crate::duality::{
    canonical_frame, expected_frame_table, frame_components, hodge_star, normal_triple, petrov_classify,
    weyl_plus_minus, HodgeOperator, PetrovTag, PetrovVerdict, PointAlgebra, WeylSplit,
};
use crate::error::{Error, Result};
use crate::exactfield::linalg::QMat;
use crate::exactfield::{point_to_f64, point_to_string, q, q_to_f64, q_to_string, qr, ExactPoint, PointSampler, Q, RatFn};
use crate::par;
use crate::tensorcalc::{
    curvature, einstein_residual, kulkarni_gg, mat4, numeric_inverse, numeric_metric, numeric_ricci, numeric_riemann,
    weyl_general, ChartMetric, CurvatureSet, Mat4, Tensor4, N,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "numeric" => Ok(Mode::Numeric),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

/// `"0 (exact)"` for identically vanishing residuals, otherwise the largest
/// absolute value seen at the sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResidualMax {
    Exact(String),
    Value(f64),
}

impl ResidualMax {
    pub fn exact_zero() -> Self {
        ResidualMax::Exact("0 (exact)".into())
    }

    pub fn value(&self) -> f64 {
        match self {
            ResidualMax::Exact(_) => 0.0,
            ResidualMax::Value(v) => *v,
        }
    }
}

/// Two fibre points over one base point where `γ̃(ū)` differs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub base: [String; 2],
    pub fibre: [[String; 2]; 2],
    pub values: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub name: String,
    pub mode: Mode,
    pub status: Status,
    pub residual_max: ResidualMax,
    pub points: usize,
    pub orientation_used: Option<i8>,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckReport {
    fn new(name: &str, mode: Mode) -> Self {
        CheckReport {
            name: name.into(),
            mode,
            status: Status::Indeterminate,
            residual_max: ResidualMax::exact_zero(),
            points: 0,
            orientation_used: None,
            detail: String::new(),
            witness: None,
        }
    }

    fn failed(name: &str, mode: Mode, e: &Error) -> Self {
        CheckReport { status: Status::Fail, detail: e.to_string(), ..Self::new(name, mode) }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Knobs shared by all checks.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub mode: Mode,
    pub points: Vec<ExactPoint>,
    /// Relative tolerance for numeric comparisons.
    pub tol: f64,
    /// Forced orientation; `None` searches both.
    pub orientation: Option<i8>,
    /// Finite-difference step.
    pub h: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { mode: Mode::Exact, points: PointSampler::new(0).points(10), tol: 1e-6, orientation: None, h: 1e-3 }
    }
}

impl CheckOptions {
    pub fn seeded(seed: u64, n: usize) -> Self {
        CheckOptions { points: PointSampler::new(seed).points(n), ..Default::default() }
    }
}

/// A metric with its curvature, computed once and shared by the checks.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub metric: ChartMetric,
    pub k: Q,
    pub curv: CurvatureSet,
    pub sol: Option<SolutionData>,
}

impl Bundle {
    pub fn new(metric: ChartMetric, k: Q) -> Result<Self> {
        let curv = curvature(&metric)?;
        Ok(Bundle { metric, k, curv, sol: None })
    }

    pub fn from_solution(sol: &SolutionData) -> Result<Self> {
        let mut b = Bundle::new(assemble_metric(sol)?, sol.k.clone())?;
        b.sol = Some(sol.clone());
        Ok(b)
    }
}

/// The orientation for which `W⁻` vanishes, with the matching star and split.
#[derive(Clone, Debug)]
pub struct Oriented {
    pub orientation: i8,
    pub metric: ChartMetric,
    pub hodge: HodgeOperator,
    pub split: WeylSplit,
    /// The Weyl tensor vanishes identically.
    pub conformally_flat: bool,
}

fn split_for(b: &Bundle, weyl: &Tensor4<RatFn>, o: i8) -> Result<(ChartMetric, HodgeOperator, WeylSplit)> {
    let m = b.metric.with_orientation(o);
    let h = hodge_star(&m, &b.curv.ginv)?;
    let s = weyl_plus_minus(weyl, &b.curv.ginv, &h);
    Ok((m, h, s))
}

/// Search (or check the forced) orientation making `W⁻ ≡ 0`.
pub fn resolve_orientation(b: &Bundle, forced: Option<i8>) -> Result<Oriented> {
    let weyl = weyl_general(&b.metric, &b.curv);
    let conformally_flat = weyl.is_zero();
    let candidates: Vec<i8> = match forced {
        Some(o) => vec![o],
        None => vec![1, -1],
    };
    for o in candidates {
        let (metric, hodge, split) = split_for(b, &weyl, o)?;
        if split.minus_vanishes() {
            return Ok(Oriented { orientation: o, metric, hodge, split, conformally_flat });
        }
    }
    Err(Error::BothOrientationsFail)
}

fn max_abs_at(fs: &[RatFn], points: &[ExactPoint]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in points {
        let pf = point_to_f64(p);
        for f in fs {
            worst = worst.max(f.eval_f64(&pf).abs());
        }
    }
    worst
}

fn exact_residual_report(name: &str, nonzero: &[RatFn], opts: &CheckOptions, what: &str) -> CheckReport {
    let mut r = CheckReport::new(name, Mode::Exact);
    r.points = opts.points.len();
    if nonzero.is_empty() {
        r.status = Status::Pass;
        r.detail = format!("{what} vanishes identically");
    } else {
        r.status = Status::Fail;
        r.residual_max = ResidualMax::Value(max_abs_at(nonzero, &opts.points));
        r.detail = format!("{} nonzero components, e.g. {}", nonzero.len(), nonzero[0]);
    }
    r
}

/// `Ric - 3K g ≡ 0` and `scal ≡ 12K`.
pub fn verify_einstein(b: &Bundle, opts: &CheckOptions) -> Result<CheckReport> {
    match opts.mode {
        Mode::Exact => {
            let mut bad: Vec<RatFn> = einstein_residual(&b.metric, &b.curv, &b.k).into_iter().map(|(_, r)| r).collect();
            let ds = &b.curv.scalar - &RatFn::constant(&b.k * q(12));
            let scalar_ok = ds.is_zero();
            if !scalar_ok {
                bad.push(ds);
            }
            let mut r = exact_residual_report("einstein", &bad, opts, "Ric - 3Kg");
            if r.passed() {
                r.detail = format!("Ric = 3Kg and scal = {} exactly", q_to_string(&(&b.k * q(12))));
            }
            Ok(r)
        }
        Mode::Numeric => {
            let g = numeric_metric(&b.metric);
            let k = q_to_f64(&b.k);
            let per_point = par::map_slice(&opts.points, |p| -> Option<f64> {
                let pf = point_to_f64(p);
                let gp = g(&pf);
                let rm = numeric_riemann(&g, &pf, opts.h)?;
                let ric = numeric_ricci(&numeric_inverse(&gp)?, &rm);
                let scale = gp.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs())) * k.abs().max(1.0);
                let mut worst: f64 = 0.0;
                for i in 0..N {
                    for j in 0..N {
                        worst = worst.max((ric[i][j] - 3.0 * k * gp[i][j]).abs() / scale);
                    }
                }
                Some(worst)
            });
            numeric_report("einstein", per_point, opts, "Ric - 3Kg (finite differences, relative)")
        }
    }
}

fn numeric_report(name: &str, per_point: Vec<Option<f64>>, opts: &CheckOptions, what: &str) -> Result<CheckReport> {
    let mut r = CheckReport::new(name, Mode::Numeric);
    r.points = opts.points.len();
    let mut worst: f64 = 0.0;
    for (p, v) in opts.points.iter().zip(&per_point) {
        match v {
            Some(v) => worst = worst.max(*v),
            None => return Err(Error::PoleAtPoint(point_to_string(p))),
        }
    }
    r.residual_max = ResidualMax::Value(worst);
    r.status = if worst <= opts.tol { Status::Pass } else { Status::Fail };
    r.detail = format!("{what}: max {worst:.3e} against tolerance {:.1e}", opts.tol);
    Ok(r)
}

/// `W⁻ ≡ 0` for exactly one orientation.
pub fn verify_selfdual(b: &Bundle, opts: &CheckOptions) -> Result<CheckReport> {
    let mut r = CheckReport::new("selfdual", Mode::Exact);
    let or = resolve_orientation(b, opts.orientation)?;
    r.orientation_used = Some(or.orientation);
    if or.conformally_flat {
        r.detail = "W vanishes identically; verdict Zero for both W+ and W-".into();
        return Ok(r);
    }
    if opts.orientation.is_none() {
        // exclusivity: the other orientation must not also work
        let weyl = weyl_general(&b.metric, &b.curv);
        let (_, _, other) = split_for(b, &weyl, -or.orientation)?;
        if other.minus_vanishes() {
            r.status = Status::Fail;
            r.detail = "W- vanishes for both orientations".into();
            return Ok(r);
        }
    }
    r.status = Status::Pass;
    r.detail = format!("W- = 0 exactly for orientation {:+}, W+ ≠ 0", or.orientation);
    Ok(r)
}

/// Per-point verdict for `W⁺`.
#[derive(Clone, Debug, Serialize)]
pub struct PointVerdict {
    pub point: String,
    pub plus: PetrovVerdict,
    pub minus: PetrovVerdict,
}

/// Petrov verdicts for `W⁺` and `W⁻` at the given points, for an
/// orientation resolved as in [`resolve_orientation`] (or forced).
pub fn classify_points(b: &Bundle, points: &[ExactPoint], forced: Option<i8>) -> Result<(i8, Vec<PointVerdict>)> {
    let weyl = weyl_general(&b.metric, &b.curv);
    let o = match resolve_orientation(b, forced) {
        Ok(or) => or.orientation,
        Err(Error::BothOrientationsFail) => forced.unwrap_or(1),
        Err(e) => return Err(e),
    };
    let (m, h, split) = split_for(b, &weyl, o)?;
    let out = par::map_slice(points, |p| -> Result<PointVerdict> {
        let pa = PointAlgebra::new(&m, &b.curv.ginv, &h, &split.full, p)?;
        Ok(PointVerdict {
            point: point_to_string(p),
            plus: petrov_classify(&pa.weyl_endo(1)?)?,
            minus: petrov_classify(&pa.weyl_endo(-1)?)?,
        })
    });
    Ok((o, out.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Self-duality plus type III of `W⁺` at every sample point by both
/// classifier routes.
pub fn verify_selfdual_typeiii(b: &Bundle, opts: &CheckOptions) -> Result<CheckReport> {
    if opts.mode == Mode::Numeric {
        return numeric_type_iii(b, opts);
    }
    let sd = verify_selfdual(b, opts)?;
    let mut r = CheckReport { name: "type3".into(), ..sd.clone() };
    r.points = opts.points.len();
    if sd.status != Status::Pass {
        return Ok(r);
    }
    let (_, verdicts) = classify_points(b, &opts.points, sd.orientation_used)?;
    for v in &verdicts {
        let ok = v.plus.tag == PetrovTag::TypeIII && v.plus.routes_agree() && v.minus.tag == PetrovTag::Zero;
        if !ok {
            r.status = Status::Fail;
            r.detail = format!("at {}: W+ {:?} (rank route {:?}), W- {:?}", v.point, v.plus.tag, v.plus.rank_route, v.minus.tag);
            return Ok(r);
        }
    }
    r.detail = format!(
        "W- = 0 for orientation {:+}; W+ ≠ 0, (W+)² ≠ 0, (W+)³ = 0 and rank 2 with degenerate non-null image at {} points",
        sd.orientation_used.unwrap_or(0),
        verdicts.len()
    );
    Ok(r)
}

type M6 = SMatrix<f64, 6, 6>;

/// Numeric mode: Riemann by finite differences, star evaluated in floats.
fn numeric_type_iii(b: &Bundle, opts: &CheckOptions) -> Result<CheckReport> {
    let or = resolve_orientation(b, opts.orientation)?;
    let g = numeric_metric(&b.metric);
    let k = q_to_f64(&b.k);
    let pairs = crate::tensorcalc::pairs();
    let results = par::map_slice(&opts.points, |p| -> Option<(f64, bool)> {
        let pf = point_to_f64(p);
        let gp = g(&pf);
        let gi = numeric_inverse(&gp)?;
        let rm = numeric_riemann(&g, &pf, opts.h)?;
        let w = |j: usize, kk: usize, l: usize, pp: usize| {
            rm.get(j, kk, l, pp) - k * (gp[j][l] * gp[kk][pp] - gp[kk][l] * gp[j][pp])
        };
        let op = M6::from_fn(|r, c| {
            let (j, kk) = pairs[r];
            let (a, bb) = pairs[c];
            let mut s = 0.0;
            for l in 0..N {
                for pp in 0..N {
                    s += w(j, kk, l, pp) * gi[l][a] * gi[pp][bb];
                }
            }
            s
        });
        let star = M6::from_fn(|r, c| or.hodge.matrix[r][c].eval_f64(&pf));
        let id = M6::identity();
        let plus = op * (id + star) * 0.5;
        let minus = op * (id - star) * 0.5;
        let scale = plus.amax().max(1e-300);
        // W⁻ is exactly zero, so its size measures the differencing noise
        let noise = (minus.amax() / scale).max(f64::EPSILON);
        let p2 = plus * plus;
        let p3 = p2 * plus;
        let nil = p3.amax() / scale.powi(3) <= opts.tol && p2.amax() / scale.powi(2) > 1e3 * noise;
        Some((minus.amax() / scale, nil))
    });
    let mut r = CheckReport::new("type3", Mode::Numeric);
    r.points = opts.points.len();
    r.orientation_used = Some(or.orientation);
    let mut worst: f64 = 0.0;
    let mut all_nil = true;
    for (p, v) in opts.points.iter().zip(results) {
        let (m, nil) = v.ok_or_else(|| Error::PoleAtPoint(point_to_string(p)))?;
        worst = worst.max(m);
        all_nil &= nil;
    }
    r.residual_max = ResidualMax::Value(worst);
    r.status = if worst <= opts.tol && all_nil && !or.conformally_flat { Status::Pass } else { Status::Fail };
    r.detail = format!("|W-|/|W+| ≤ {worst:.3e}; W+ nilpotent of index 3 at all points: {all_nil}");
    Ok(r)
}

/// `2R - ζ⊗η - η⊗ζ - 2K g∧g`, componentwise.
pub fn identity_residual(b: &Bundle, sol: &SolutionData) -> Result<Tensor4<RatFn>> {
    let oct = octuple_fields(sol)?;
    let gg = kulkarni_gg(&b.metric);
    let two = q(2);
    let two_k = &b.k * q(2);
    Ok(Tensor4::from_fn(|j, k, l, p| {
        let lhs = &b.curv.riemann.get(j, k, l, p).scale(&two) - &gg.get(j, k, l, p).scale(&two_k);
        &lhs - &(&(&oct.zeta[j][k] * &oct.eta[l][p]) + &(&oct.eta[j][k] * &oct.zeta[l][p]))
    }))
}

/// The curvature identity with `ζ` from the octuple and `η` from the
/// deformed frame (which depends on `r`, unlike the metric).
pub fn verify_curvature_identity(b: &Bundle, sol: &SolutionData, opts: &CheckOptions) -> Result<CheckReport> {
    match opts.mode {
        Mode::Exact => {
            let res = identity_residual(b, sol)?;
            let bad: Vec<RatFn> = res.iter().filter(|x| !x.is_zero()).cloned().collect();
            Ok(exact_residual_report("identity", &bad, opts, "2R - ζ⊗η - η⊗ζ - 2K g∧g"))
        }
        Mode::Numeric => {
            let oct = octuple_fields(sol)?;
            let g = numeric_metric(&b.metric);
            let k = q_to_f64(&b.k);
            let per_point = par::map_slice(&opts.points, |p| -> Option<f64> {
                let pf = point_to_f64(p);
                let gp = g(&pf);
                let rm = numeric_riemann(&g, &pf, opts.h)?;
                let z = mat4(|i, j| oct.zeta[i][j].eval_f64(&pf));
                let e = mat4(|i, j| oct.eta[i][j].eval_f64(&pf));
                let mut worst: f64 = 0.0;
                let mut scale: f64 = 1.0;
                for (idx, r) in rm.iter().enumerate() {
                    let (j, kk, l, pp) = (idx / 64, (idx / 16) % 4, (idx / 4) % 4, idx % 4);
                    let gg = gp[j][l] * gp[kk][pp] - gp[kk][l] * gp[j][pp];
                    let t = 2.0 * r - z[j][kk] * e[l][pp] - e[j][kk] * z[l][pp] - 2.0 * k * gg;
                    worst = worst.max(t.abs());
                    scale = scale.max(r.abs());
                }
                Some(worst / scale)
            });
            numeric_report("identity", per_point, opts, "2R - ζ⊗η - η⊗ζ - 2K g∧g (relative)")
        }
    }
}

/// Metric, octuple forms and curvature in the canonical frame at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameTables {
    pub point: ExactPoint,
    pub g: QMat,
    pub zeta: QMat,
    pub eta: QMat,
    pub theta: QMat,
    pub curvature: Tensor4<Q>,
}

impl FrameTables {
    /// Same metric, forms and curvature components (the point is ignored).
    pub fn same_model(&self, o: &FrameTables) -> bool {
        self.g == o.g && self.zeta == o.zeta && self.eta == o.eta && self.theta == o.theta && self.curvature == o.curvature
    }

    /// Nonzero curvature components `(index, value)`.
    pub fn curvature_support(&self) -> Vec<([usize; 4], Q)> {
        self.curvature
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| ([i / 64, (i / 16) % 4, (i / 4) % 4, i % 4], x.clone()))
            .collect()
    }
}

pub fn frame_tables(b: &Bundle, points: &[ExactPoint], forced: Option<i8>) -> Result<(i8, Vec<FrameTables>)> {
    let or = resolve_orientation(b, forced)?;
    if or.conformally_flat {
        return Err(Error::NotTypeIII("W vanishes identically".into()));
    }
    let out = par::map_slice(points, |p| -> Result<FrameTables> {
        let pa = PointAlgebra::new(&or.metric, &b.curv.ginv, &or.hodge, &or.split.full, p)?;
        let triple = normal_triple(&pa.weyl_endo(1)?)?;
        let cf = canonical_frame(&pa, &triple)?;
        let r = b.curv.riemann.eval(p)?;
        Ok(FrameTables {
            point: p.clone(),
            curvature: frame_components(&r, &cf.frame),
            g: cf.g,
            zeta: cf.zeta,
            eta: cf.eta,
            theta: cf.theta,
        })
    });
    Ok((or.orientation, out.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Canonical-frame tables agree across all points and match the fixed
/// pattern for `g, ζ, η, θ`.
pub fn verify_curvature_homogeneity(b: &Bundle, opts: &CheckOptions) -> Result<CheckReport> {
    let mut r = CheckReport::new("homogeneous", Mode::Exact);
    r.points = opts.points.len();
    let (o, tables) = frame_tables(b, &opts.points, opts.orientation)?;
    r.orientation_used = Some(o);
    let (g0, z0, e0, t0) = expected_frame_table();
    for t in &tables {
        if t.g != g0 || t.zeta != z0 || t.eta != e0 || t.theta != t0 {
            r.status = Status::Fail;
            r.detail = format!("frame pattern differs at {}", point_to_string(&t.point));
            return Ok(r);
        }
        if !t.same_model(&tables[0]) {
            r.status = Status::Fail;
            r.detail = format!(
                "curvature table at {} differs from the one at {}",
                point_to_string(&t.point),
                point_to_string(&tables[0].point)
            );
            return Ok(r);
        }
    }
    r.status = if tables.is_empty() { Status::Indeterminate } else { Status::Pass };
    let support = tables.first().map(|t| t.curvature_support().len()).unwrap_or(0);
    r.detail = format!("identical canonical-frame tables at {} points ({support} nonzero curvature components)", tables.len());
    if opts.mode == Mode::Numeric {
        r.detail.push_str("; canonical frames need exact arithmetic, ran in exact mode");
    }
    Ok(r)
}

/// Certify that a 1-form vanishes nowhere on `x2 > 0`: some component must
/// have a nonzero constant numerator and a denominator that is a power of
/// `x2`.
pub fn certify_nonvanishing(beta: &[RatFn; N], points: &[ExactPoint]) -> CheckReport {
    let mut r = CheckReport::new("nonwalker", Mode::Exact);
    r.points = points.len();
    let cert = beta.iter().position(|c| {
        let den_ok = c.denom().as_monomial().map(|(m, _)| (0..3).all(|v| m.0[v] == 0)).unwrap_or(false);
        c.numer().as_constant().map(|x| !x.is_zero()).unwrap_or(false) && den_ok
    });
    let min_sample = points
        .iter()
        .map(|p| {
            let pf = point_to_f64(p);
            beta.iter().map(|c| c.eval_f64(&pf).abs()).fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    r.residual_max = ResidualMax::Value(if points.is_empty() { 0.0 } else { min_sample });
    match cert {
        Some(j) => {
            r.status = Status::Pass;
            r.detail = format!(
                "β(∂{}) = {} has constant numerator, nonzero wherever φ = x2 > 0; min |β| over samples {min_sample:.3e}",
                j + 1,
                beta[j]
            );
        }
        None => {
            r.status = Status::Fail;
            let zero_at = points.iter().find(|p| beta.iter().all(|c| c.eval(p).map(|v| v.is_zero()).unwrap_or(false)));
            r.detail = match zero_at {
                Some(p) => format!("β vanishes at {}", point_to_string(p)),
                None => "cannot certify that β vanishes nowhere".into(),
            };
        }
    }
    r
}

/// `β = φ⁻² ξ` is nowhere zero, so no compatible Walker distribution exists.
pub fn verify_nonwalker(sol: &SolutionData, opts: &CheckOptions) -> Result<CheckReport> {
    let oct = octuple_fields(sol)?;
    Ok(certify_nonvanishing(&oct.beta, &opts.points))
}

/// Fibre points tried, in order, when looking for a witness.
fn fibre_candidates() -> Vec<[Q; 2]> {
    [(1, 1, 1, 1), (1, 1, 2, 1), (2, 1, 1, 1), (1, 1, 1, 2), (-1, 1, 1, 1), (2, 1, 2, 1), (0, 1, 1, 1), (1, 2, 3, 2)]
        .iter()
        .map(|&(a, b, c, d)| [qr(a, b), qr(c, d)])
        .collect()
}

/// Search for two fibre points over one base point where `γ̃(ū)` differs.
pub fn find_witness(inv: &RatFn, bases: &[[Q; 2]]) -> Option<Witness> {
    for y in bases {
        let vals: Vec<([Q; 2], Q)> = fibre_candidates()
            .into_iter()
            .filter_map(|x| {
                let p = [y[0].clone(), y[1].clone(), x[0].clone(), x[1].clone()];
                inv.eval(&p).ok().map(|v| (x, v))
            })
            .collect();
        for (i, (xa, va)) in vals.iter().enumerate() {
            if let Some((xb, vb)) = vals[i + 1..].iter().find(|(_, vb)| vb != va) {
                return Some(Witness {
                    base: [q_to_string(&y[0]), q_to_string(&y[1])],
                    fibre: [[q_to_string(&xa[0]), q_to_string(&xa[1])], [q_to_string(&xb[0]), q_to_string(&xb[1])]],
                    values: [q_to_string(va), q_to_string(vb)],
                });
            }
        }
    }
    None
}

/// `4γ̃(ū)` from the Christoffel symbols of the built metric.
pub fn gamma_u_from_connection(b: &Bundle, sol: &SolutionData) -> Result<RatFn> {
    let ds = derived_scalars(sol)?;
    let frame = htilde_frame(sol, &ds)?;
    let oct = octuple_fields(sol)?;
    Ok(gamma_via_connection(&b.metric, &b.curv.christoffel, &frame, &oct.zeta, &oct.ubar)?.scale(&q(4)))
}

/// A nonconstant fibrewise invariant certifies that the metric is not
/// locally homogeneous; a constant one certifies nothing.
pub fn nonhomogeneity_witness(b: &Bundle, sol: &SolutionData, opts: &CheckOptions) -> Result<CheckReport> {
    let mut r = CheckReport::new("witness", Mode::Exact);
    let inv = invariant_gamma_u(sol);
    let via = gamma_u_from_connection(b, sol)?;
    let cross: Vec<&ExactPoint> = opts.points.iter().take(5).collect();
    r.points = cross.len();
    let mut worst: f64 = 0.0;
    for p in &cross {
        let (a, c) = (inv.eval(p)?, via.eval(p)?);
        worst = worst.max(q_to_f64(&(a - c)).abs());
    }
    if inv != via {
        r.status = Status::Fail;
        r.residual_max = ResidualMax::Value(worst);
        r.detail = format!("closed form {inv} disagrees with the connection computation {via}");
        return Ok(r);
    }
    let fibre_dependent = [2, 3].iter().any(|&v| inv.numer().involves(v) || inv.denom().involves(v));
    if !fibre_dependent {
        r.detail = format!("γ̃(ū) = ({inv})/4 is constant along fibres; homogeneity not decided");
        return Ok(r);
    }
    let mut bases = vec![[q(0), q(0)]];
    bases.extend(opts.points.iter().map(|p| [p[0].clone(), p[1].clone()]));
    match find_witness(&inv, &bases) {
        Some(w) => {
            r.status = Status::Pass;
            r.detail = format!(
                "4γ̃(ū) = {inv}; over y = ({}, {}) it takes {} at x = ({}, {}) and {} at x = ({}, {}); matches the connection at {} points",
                w.base[0], w.base[1], w.values[0], w.fibre[0][0], w.fibre[0][1], w.values[1], w.fibre[1][0], w.fibre[1][1],
                cross.len()
            );
            r.witness = Some(w);
        }
        None => r.detail = "invariant depends on the fibre but no witness among the candidate points".into(),
    }
    Ok(r)
}

/// Finite-difference Riemann against the exact tensor, relative error.
pub fn crosscheck_numeric_riemann(b: &Bundle, opts: &CheckOptions) -> Result<CheckReport> {
    let g = numeric_metric(&b.metric);
    let per_point = par::map_slice(&opts.points, |p| -> Option<f64> {
        let pf = point_to_f64(p);
        let rm = numeric_riemann(&g, &pf, opts.h)?;
        let ex = b.curv.riemann.eval_f64(&pf);
        let scale = ex.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        Some(rm.iter().zip(ex.iter()).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max) / scale)
    });
    let mut r = numeric_report("fdcheck", per_point, opts, "finite-difference vs exact Riemann (relative)")?;
    r.name = "fdcheck".into();
    Ok(r)
}

/// The checks a suite can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Einstein,
    Selfdual,
    Type3,
    Identity,
    Homogeneous,
    Nonwalker,
    Witness,
    Fdcheck,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Einstein,
        Check::Selfdual,
        Check::Type3,
        Check::Identity,
        Check::Homogeneous,
        Check::Nonwalker,
        Check::Witness,
        Check::Fdcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Einstein => "einstein",
            Check::Selfdual => "selfdual",
            Check::Type3 => "type3",
            Check::Identity => "identity",
            Check::Homogeneous => "homogeneous",
            Check::Nonwalker => "nonwalker",
            Check::Witness => "witness",
            Check::Fdcheck => "fdcheck",
        }
    }

    fn needs_solution(self) -> bool {
        matches!(self, Check::Identity | Check::Nonwalker | Check::Witness)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

pub fn run_check(b: &Bundle, check: Check, opts: &CheckOptions) -> Result<CheckReport> {
    let sol = match (&b.sol, check.needs_solution()) {
        (None, true) => {
            let mut r = CheckReport::new(check.name(), opts.mode);
            r.detail = "needs solution data; metric-only input".into();
            return Ok(r);
        }
        (s, _) => s.as_ref(),
    };
    match check {
        Check::Einstein => verify_einstein(b, opts),
        Check::Selfdual => verify_selfdual(b, opts),
        Check::Type3 => verify_selfdual_typeiii(b, opts),
        Check::Identity => verify_curvature_identity(b, sol.expect("checked"), opts),
        Check::Homogeneous => verify_curvature_homogeneity(b, opts),
        Check::Nonwalker => verify_nonwalker(sol.expect("checked"), opts),
        Check::Witness => nonhomogeneity_witness(b, sol.expect("checked"), opts),
        Check::Fdcheck => crosscheck_numeric_riemann(b, opts),
    }
}

/// Run several checks concurrently over one shared bundle. Errors inside a
/// check become failing reports; errors that signal bad input (poles,
/// parse errors) are returned instead.
pub fn run_suite(b: &Bundle, checks: &[Check], opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    let out = par::map_slice(checks, |&c| (c, run_check(b, c, opts)));
    out.into_iter()
        .map(|(c, r)| match r {
            Ok(r) => Ok(r),
            Err(e @ (Error::PoleAtPoint(_) | Error::Parse(_))) => Err(e),
            Err(e) => Ok(CheckReport::failed(c.name(), opts.mode, &e)),
        })
        .collect()
}

/// A suite passes iff every report passes.
pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(CheckReport::passed)
}

/// Sample points avoiding poles: the seeded sampler already keeps
/// `x2 ∈ [1/2, 2]`; this drops any point where `g` has a pole anyway.
pub fn regular_points(m: &ChartMetric, seed: u64, n: usize) -> Vec<ExactPoint> {
    let mut s = PointSampler::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = s.next_point();
        if m.eval(&p).is_ok() {
            out.push(p);
        }
    }
    out
}

/// Metric with the `(i, j)` component perturbed by `delta`, symmetrically.
pub fn perturbed(m: &ChartMetric, i: usize, j: usize, delta: &RatFn) -> ChartMetric {
    let mut g: Mat4 = m.g.clone();
    g[i][j] = &g[i][j] + delta;
    if i != j {
        g[j][i] = &g[j][i] + delta;
    }
    ChartMetric { g, ..m.clone() }
}
