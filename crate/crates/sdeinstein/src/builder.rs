//! The metric construction: from solution data `(K, λ, μ, q)` of the
//! two-plane system to the neutral metric on `U × Π₊`, its octuple fields,
//! the deformed horizontal frame and the curvature 2-forms `ζ, η, θ`.
//!
//! Chart: `(y1, y2, x1, x2)` with `c = ∂/∂x1`, `a = ∂/∂x2`, `Ω(a, c) = 1`,
//! radial field `X = x1 c + x2 a` and `φ = Ω(X, c) = x2`. Vertical vectors
//! are stored as `[c-component, a-component]`, so
//! `Ω(u, v) = u_a v_c - u_c v_a`. A base vector `w` has `ξ(w) = w[0]`,
//! `τ(w) = w[1]`, and `Y_w = ξ(w) X + τ(w) c`; the partial metric pairs a
//! vertical `v` with a horizontal lift of `w` as `h(v, w) = Ω(Y_w, v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactfield::{q, qr, Poly, QJson, RatFn, Q};
use crate::tensorcalc::{mat4, ChartMetric, Christoffel, Mat4, N};

pub type Vertical = [RatFn; 2];

/// The eight unknown functions of the base plus `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionData {
    pub k: Q,
    pub lambda_cc: Poly,
    pub lambda_ca: Poly,
    pub lambda_aa: Poly,
    pub mu_cc: Poly,
    pub mu_ca: Poly,
    pub mu_aa: Poly,
    /// `Ω(c, q)`
    pub omega_cq: Poly,
    /// `Ω(a, q)`
    pub omega_aq: Poly,
    /// Replaces the derived `r` (which then is not checked against the data).
    pub r_override: Option<Poly>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Components {
    lambda_cc: Poly,
    lambda_ca: Poly,
    lambda_aa: Poly,
    mu_cc: Poly,
    mu_ca: Poly,
    mu_aa: Poly,
    omega_cq: Poly,
    omega_aq: Poly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SolutionJson {
    #[serde(rename = "K")]
    k: QJson,
    components: Components,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_override: Option<Poly>,
}

impl Serialize for SolutionData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SolutionJson {
            k: QJson::from(&self.k),
            components: Components {
                lambda_cc: self.lambda_cc.clone(),
                lambda_ca: self.lambda_ca.clone(),
                lambda_aa: self.lambda_aa.clone(),
                mu_cc: self.mu_cc.clone(),
                mu_ca: self.mu_ca.clone(),
                mu_aa: self.mu_aa.clone(),
                omega_cq: self.omega_cq.clone(),
                omega_aq: self.omega_aq.clone(),
            },
            r_override: self.r_override.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolutionData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SolutionJson::deserialize(d)?;
        let k = j.k.to_q().map_err(serde::de::Error::custom)?;
        let c = j.components;
        let sol = SolutionData {
            k,
            lambda_cc: c.lambda_cc,
            lambda_ca: c.lambda_ca,
            lambda_aa: c.lambda_aa,
            mu_cc: c.mu_cc,
            mu_ca: c.mu_ca,
            mu_aa: c.mu_aa,
            omega_cq: c.omega_cq,
            omega_aq: c.omega_aq,
            r_override: j.r_override,
        };
        sol.check_base_only().map_err(serde::de::Error::custom)?;
        Ok(sol)
    }
}

impl SolutionData {
    pub fn zero(k: Q) -> Self {
        SolutionData {
            k,
            lambda_cc: Poly::zero(),
            lambda_ca: Poly::zero(),
            lambda_aa: Poly::zero(),
            mu_cc: Poly::zero(),
            mu_ca: Poly::zero(),
            mu_aa: Poly::zero(),
            omega_cq: Poly::zero(),
            omega_aq: Poly::zero(),
            r_override: None,
        }
    }

    pub fn components(&self) -> [&Poly; 8] {
        [
            &self.lambda_cc,
            &self.lambda_ca,
            &self.lambda_aa,
            &self.mu_cc,
            &self.mu_ca,
            &self.mu_aa,
            &self.omega_cq,
            &self.omega_aq,
        ]
    }

    /// All components are functions of `(y1, y2)` only.
    pub fn check_base_only(&self) -> Result<()> {
        let mut all: Vec<&Poly> = self.components().to_vec();
        if let Some(r) = &self.r_override {
            all.push(r);
        }
        for p in all {
            if p.involves(2) || p.involves(3) {
                return Err(Error::Parse(format!("component depends on fibre coordinates: {p}")));
            }
        }
        Ok(())
    }

    pub fn with_r_override(&self, r: Poly) -> Self {
        SolutionData { r_override: Some(r), ..self.clone() }
    }

    /// `q` as a vertical vector: `q^c = Ω(a,q)`, `q^a = -Ω(c,q)`.
    pub fn q_vec(&self) -> Vertical {
        [self.omega_aq.clone().into(), (-&self.omega_cq).into()]
    }

    pub fn lambda(&self, u: &Vertical, v: &Vertical) -> RatFn {
        sym_form(&self.lambda_cc, &self.lambda_ca, &self.lambda_aa, u, v)
    }

    pub fn mu(&self, u: &Vertical, v: &Vertical) -> RatFn {
        sym_form(&self.mu_cc, &self.mu_ca, &self.mu_aa, u, v)
    }
}

pub(crate) fn sym_form(cc: &Poly, ca: &Poly, aa: &Poly, u: &Vertical, v: &Vertical) -> RatFn {
    let cc = RatFn::from(cc.clone());
    let ca = RatFn::from(ca.clone());
    let aa = RatFn::from(aa.clone());
    let t1 = &cc * &(&u[0] * &v[0]);
    let t2 = &ca * &(&(&u[0] * &v[1]) + &(&u[1] * &v[0]));
    let t3 = &aa * &(&u[1] * &v[1]);
    &(&t1 + &t2) + &t3
}

/// `Ω(u, v)` for vertical vectors, with `Ω(a, c) = 1`.
pub fn omega(u: &Vertical, v: &Vertical) -> RatFn {
    &(&u[1] * &v[0]) - &(&u[0] * &v[1])
}

pub fn vc() -> Vertical {
    [RatFn::one(), RatFn::zero()]
}

pub fn va() -> Vertical {
    [RatFn::zero(), RatFn::one()]
}

/// Radial field `X = x1 c + x2 a`.
pub fn radial() -> Vertical {
    [RatFn::var(2), RatFn::var(3)]
}

pub fn phi() -> RatFn {
    RatFn::var(3)
}

fn vadd(u: &Vertical, v: &Vertical) -> Vertical {
    [&u[0] + &v[0], &u[1] + &v[1]]
}

fn vscale(s: &RatFn, u: &Vertical) -> Vertical {
    [s * &u[0], s * &u[1]]
}

/// `Y_w = ξ(w) X + τ(w) c` for a constant base vector `w = (ξ, τ)`.
pub fn y_w(w: &[Q; 2]) -> Vertical {
    vadd(&vscale(&RatFn::constant(w[0].clone()), &radial()), &vscale(&RatFn::constant(w[1].clone()), &vc()))
}

/// `h(v, w) = Ω(Y_w, v)`.
pub fn h_pair(v: &Vertical, w: &[Q; 2]) -> RatFn {
    omega(&y_w(w), v)
}

pub(crate) fn d(p: &Poly, var: usize) -> RatFn {
    p.diff(var).into()
}

/// The scalars derived from solution data.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedScalars {
    pub phi: RatFn,
    pub s: RatFn,
    pub r: RatFn,
    pub f: RatFn,
    /// `A = f φ⁻² - 2 r φ`
    pub a: RatFn,
    pub q: RatFn,
    pub e: RatFn,
    pub l: RatFn,
    pub l_plus: RatFn,
    pub l_minus: RatFn,
}

pub fn derived_scalars(sol: &SolutionData) -> Result<DerivedScalars> {
    let x = radial();
    let c = vc();
    let a = va();
    let qv = sol.q_vec();
    let k = RatFn::constant(sol.k.clone());
    let ph = phi();
    let lcc: RatFn = sol.lambda_cc.clone().into();
    let lca: RatFn = sol.lambda_ca.clone().into();
    let laa: RatFn = sol.lambda_aa.clone().into();
    let det_l = &(&lcc * &laa) - &(&lca * &lca);
    let s = -(&(&(&d(&sol.lambda_ca, 0) + &d(&sol.omega_aq, 1).scale(&q(2))) - &sol.mu(&qv, &a).scale(&q(4)))
        + &det_l);
    let r = match &sol.r_override {
        Some(r) => RatFn::from(r.clone()),
        None => {
            let (_, second) = crate::pdesolve::residual_eqn(sol);
            if !second.is_zero() {
                return Err(Error::EqnResidualNonzero(format!("x1-coefficient residual {second}")));
            }
            let t = &(&(&k * &d(&sol.omega_cq, 0)).scale(&q(-1)) + &s.diff(1))
                - &(&k * &sol.lambda(&c, &qv)).scale(&q(2));
            t.scale(&qr(1, 8))
        }
    };
    let ocq: RatFn = sol.omega_cq.clone().into();
    let quarter = qr(1, 4);
    let f = &(&r * &ph.pow(3)) + &(&(&(&sol.lambda(&c, &x) - &sol.mu(&x, &x)) + &ocq) * &ph).scale(&quarter);
    let phinv = ph.inv()?;
    let a_fn = &(&f * &phinv.pow(2)) - &(&r * &ph).scale(&q(2));
    let qq = &sol.lambda(&x, &x) + &omega(&x, &qv).scale(&q(2));
    let e = &(&sol.lambda(&c, &c) - &sol.mu(&c, &x).scale(&q(2))) + &(&k * &ph.pow(2)).scale(&qr(1, 2));
    let l = &sol.mu(&x, &x) + &ocq;
    let two_f_phi = (&f * &phinv).scale(&q(2));
    let l_plus = &l + &two_f_phi;
    let l_minus = &l - &two_f_phi;
    Ok(DerivedScalars { phi: ph, s, r, f, a: a_fn, q: qq, e, l, l_plus, l_minus })
}

/// The five pieces of the deformation `F = F^K + F^q + F^λ + F^μ + fζ`
/// applied to a constant base vector.
#[derive(Clone, Debug)]
pub struct FParts {
    pub k: Vertical,
    pub q: Vertical,
    pub lambda: Vertical,
    pub mu: Vertical,
    pub fzeta: Vertical,
}

impl FParts {
    /// `F^K + F^q + F^λ + F^μ` (the trace-free part).
    pub fn without_fzeta(&self) -> Vertical {
        vadd(&vadd(&self.k, &self.q), &vadd(&self.lambda, &self.mu))
    }

    pub fn total(&self) -> Vertical {
        vadd(&self.without_fzeta(), &self.fzeta)
    }
}

pub fn f_parts(sol: &SolutionData, ds: &DerivedScalars, w: &[Q; 2]) -> Result<FParts> {
    let x = radial();
    let c = vc();
    let qv = sol.q_vec();
    let ph = phi();
    let phinv = ph.inv()?;
    let (xi, tau) = (RatFn::constant(w[0].clone()), RatFn::constant(w[1].clone()));
    let yw = y_w(w);
    let k = RatFn::constant(sol.k.clone());
    // F^K w = K φ τ(w) X / 2
    let fk = vscale(&(&(&k * &ph) * &tau).scale(&qr(1, 2)), &x);
    // F^q w = 2 ξ(w) q - (d_q φ) φ⁻¹ Y_w, with d_q φ = Ω(q, c)
    let dq_phi = omega(&qv, &c);
    let fq = vadd(&vscale(&xi.scale(&q(2)), &qv), &vscale(&-(&dq_phi * &phinv), &yw));
    // F^λ w = φ⁻¹ [ξ(w) λ(X,X) c + τ(w) λ(c,c) X]
    let fl = vscale(
        &phinv,
        &vadd(&vscale(&(&xi * &sol.lambda(&x, &x)), &c), &vscale(&(&tau * &sol.lambda(&c, &c)), &x)),
    );
    // F^μ w = φ⁻¹ [μ(X,X) Y_w - 2 μ(Y_w, X) X]
    let fm = vscale(
        &phinv,
        &vadd(&vscale(&sol.mu(&x, &x), &yw), &vscale(&sol.mu(&yw, &x).scale(&q(-2)), &x)),
    );
    // f ζ w with ζ w = -2 φ⁻² Y_w
    let fz = vscale(&(&ds.f * &phinv.pow(2)).scale(&q(-2)), &yw);
    Ok(FParts { k: fk, q: fq, lambda: fl, mu: fm, fzeta: fz })
}

pub fn f_operator(sol: &SolutionData, ds: &DerivedScalars, w: &[Q; 2]) -> Result<Vertical> {
    Ok(f_parts(sol, ds, w)?.total())
}

fn e_base(i: usize) -> [Q; 2] {
    if i == 0 { [q(1), q(0)] } else { [q(0), q(1)] }
}

/// Metric on `(y1, y2, x1, x2)`: vertical block zero, cross block given by
/// `h`, horizontal block `-[h(F∂_i, ∂_j) + h(F∂_j, ∂_i)]`.
pub fn assemble_metric(sol: &SolutionData) -> Result<ChartMetric> {
    let ds = derived_scalars(sol)?;
    assemble_metric_with(sol, &ds)
}

pub fn assemble_metric_with(sol: &SolutionData, ds: &DerivedScalars) -> Result<ChartMetric> {
    let fw = [f_operator(sol, ds, &e_base(0))?, f_operator(sol, ds, &e_base(1))?];
    let mut g = mat4(|_, _| RatFn::zero());
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = -(&h_pair(&fw[i], &e_base(j)) + &h_pair(&fw[j], &e_base(i)));
        }
    }
    for (vi, v) in [vc(), va()].iter().enumerate() {
        for j in 0..2 {
            let x = h_pair(v, &e_base(j));
            g[2 + vi][j] = x.clone();
            g[j][2 + vi] = x;
        }
    }
    Ok(ChartMetric::new(g, 1))
}

/// The flat reference metric (deformation `F = 0`).
pub fn reference_metric() -> ChartMetric {
    let mut g = mat4(|_, _| RatFn::zero());
    for (vi, v) in [vc(), va()].iter().enumerate() {
        for j in 0..2 {
            let x = h_pair(v, &e_base(j));
            g[2 + vi][j] = x.clone();
            g[j][2 + vi] = x;
        }
    }
    ChartMetric::new(g, 1)
}

/// Octuple fields in coordinates (reference horizontal distribution).
#[derive(Clone, Debug)]
pub struct OctupleForms {
    pub alpha: [RatFn; N],
    pub beta: [RatFn; N],
    pub zeta: Mat4,
    /// `θ = φ² Ω` on verticals, zero on the deformed horizontals.
    pub theta: Mat4,
    pub eta: Mat4,
    pub wbar: [RatFn; N],
    pub ubar: [RatFn; N],
}

/// The deformed horizontal frame `w̃_j = ∂_j + F∂_j`, in coordinates.
#[derive(Clone, Debug)]
pub struct FrameField {
    pub w1: [RatFn; N],
    pub w2: [RatFn; N],
    pub c: [RatFn; N],
    pub a: [RatFn; N],
}

impl FrameField {
    /// Columns `(c, a, w̃1, w̃2)`.
    pub fn columns(&self) -> [[RatFn; N]; N] {
        [self.c.clone(), self.a.clone(), self.w1.clone(), self.w2.clone()]
    }

    /// `inv[A][i]` = frame component `A` (order `c, a, w̃1, w̃2`) of `∂_i`.
    pub fn inverse(&self) -> Mat4 {
        let mut inv = mat4(|_, _| RatFn::zero());
        inv[0][2] = RatFn::one();
        inv[1][3] = RatFn::one();
        for (j, w) in [&self.w1, &self.w2].iter().enumerate() {
            inv[2 + j][j] = RatFn::one();
            inv[0][j] = -&w[2];
            inv[1][j] = -&w[3];
        }
        inv
    }
}

pub fn htilde_frame(sol: &SolutionData, ds: &DerivedScalars) -> Result<FrameField> {
    let lift = |j: usize| -> Result<[RatFn; N]> {
        let fw = f_operator(sol, ds, &e_base(j))?;
        let mut v = [RatFn::zero(), RatFn::zero(), fw[0].clone(), fw[1].clone()];
        v[j] = RatFn::one();
        Ok(v)
    };
    let unit = |i: usize| -> [RatFn; N] { std::array::from_fn(|k| if k == i { RatFn::one() } else { RatFn::zero() }) };
    Ok(FrameField { w1: lift(0)?, w2: lift(1)?, c: unit(2), a: unit(3) })
}

/// Express a 2-form given on the frame `(c, a, w̃1, w̃2)` in coordinates.
fn frame_form_to_coords(frame_form: &Mat4, inv: &Mat4) -> Mat4 {
    mat4(|i, j| {
        let mut acc = RatFn::zero();
        for aa in 0..N {
            if inv[aa][i].is_zero() {
                continue;
            }
            for bb in 0..N {
                if inv[bb][j].is_zero() || frame_form[aa][bb].is_zero() {
                    continue;
                }
                acc = &acc + &(&(&inv[aa][i] * &inv[bb][j]) * &frame_form[aa][bb]);
            }
        }
        acc
    })
}

/// `η` and `θ` in coordinates: `η(v, w̃) = h(v, w)`, `η` vanishes on pairs
/// of verticals and on pairs of deformed horizontals; `θ = φ² Ω` on
/// verticals and `θ(w̃, ·) = 0`.
pub fn eta_theta_extension(frame: &FrameField) -> (Mat4, Mat4) {
    let inv = frame.inverse();
    let mut ef = mat4(|_, _| RatFn::zero());
    for (vi, v) in [vc(), va()].iter().enumerate() {
        for j in 0..2 {
            let x = h_pair(v, &e_base(j));
            ef[vi][2 + j] = x.clone();
            ef[2 + j][vi] = -x;
        }
    }
    let mut tf = mat4(|_, _| RatFn::zero());
    let p2 = phi().pow(2);
    tf[0][1] = -&p2;
    tf[1][0] = p2;
    (frame_form_to_coords(&ef, &inv), frame_form_to_coords(&tf, &inv))
}

pub fn octuple_fields(sol: &SolutionData) -> Result<OctupleForms> {
    let ds = derived_scalars(sol)?;
    octuple_fields_with(sol, &ds)
}

pub fn octuple_fields_with(sol: &SolutionData, ds: &DerivedScalars) -> Result<OctupleForms> {
    let frame = htilde_frame(sol, ds)?;
    let (eta, theta) = eta_theta_extension(&frame);
    let phinv = phi().inv()?;
    let mut zeta = mat4(|_, _| RatFn::zero());
    zeta[0][1] = phinv.scale(&q(2));
    zeta[1][0] = phinv.scale(&q(-2));
    let z = RatFn::zero();
    Ok(OctupleForms {
        alpha: [z.clone(), z.clone(), z.clone(), -&phinv],
        beta: [phinv.pow(2), z.clone(), z.clone(), z.clone()],
        zeta,
        theta,
        eta,
        wbar: [z.clone(), phinv.clone(), z.clone(), z.clone()],
        ubar: [z.clone(), z.clone(), phinv.pow(3), z],
    })
}

/// The local invariant `K + [λ(c,c) - 2μ(c,X)] φ⁻²`, which equals `4 γ̃(ū)`
/// for the connection form `γ̃` of the deformed horizontal distribution.
pub fn invariant_gamma_u(sol: &SolutionData) -> RatFn {
    let c = vc();
    let x = radial();
    let phinv2 = RatFn::var_inv_pow(3, 2);
    let t = &sol.lambda(&c, &c) - &sol.mu(&c, &x).scale(&q(2));
    &RatFn::constant(sol.k.clone()) + &(&t * &phinv2)
}

/// Closed form `4γ̃(v) = (E + Kφ²/2) Ω(X, v) - (L + 4rφ²) Ω(v, c)`.
pub fn gamma_closed_form(sol: &SolutionData, ds: &DerivedScalars, v: &Vertical) -> Result<RatFn> {
    let k = RatFn::constant(sol.k.clone());
    let ph2 = phi().pow(2);
    let t1 = &(&ds.e + &(&k * &ph2).scale(&qr(1, 2))) * &omega(&radial(), v);
    let t2 = &(&ds.l + &(&ds.r * &ph2).scale(&q(4))) * &omega(v, &vc());
    Ok((&t1 - &t2).scale(&qr(1, 4)))
}

/// `∇_V W` in coordinates.
pub fn covariant(gamma: &Christoffel, v: &[RatFn; N], w: &[RatFn; N]) -> [RatFn; N] {
    std::array::from_fn(|a| {
        let mut acc = RatFn::zero();
        for b in 0..N {
            if v[b].is_zero() {
                continue;
            }
            acc = &acc + &(&v[b] * &w[a].diff(b));
            for c in 0..N {
                if !w[c].is_zero() && !gamma[a][b][c].is_zero() {
                    acc = &acc + &(&(&gamma[a][b][c] * &v[b]) * &w[c]);
                }
            }
        }
        acc
    })
}

fn metric_pair(g: &Mat4, u: &[RatFn; N], v: &[RatFn; N]) -> RatFn {
    let mut acc = RatFn::zero();
    for i in 0..N {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..N {
            if !v[j].is_zero() && !g[i][j].is_zero() {
                acc = &acc + &(&(&u[i] * &g[i][j]) * &v[j]);
            }
        }
    }
    acc
}

/// `γ̃(V) = -ĝ(∇_V w̃1, w̃2) / ζ(w̃1, w̃2)` for a vector field `V`.
pub fn gamma_via_connection(
    m: &ChartMetric,
    gamma: &Christoffel,
    frame: &FrameField,
    zeta: &Mat4,
    v: &[RatFn; N],
) -> Result<RatFn> {
    let zw = metric_pair(zeta, &frame.w1, &frame.w2);
    if zw.is_zero() {
        return Err(Error::DegenerateFrame("ζ(w̃1, w̃2) vanishes".into()));
    }
    let nab = covariant(gamma, v, &frame.w1);
    (-metric_pair(&m.g, &nab, &frame.w2)).checked_div(&zw)
}

/// Bilinear pairing of two vector fields through a 2-tensor in coordinates.
pub fn pair(t: &Mat4, u: &[RatFn; N], v: &[RatFn; N]) -> RatFn {
    metric_pair(t, u, v)
}
