//! Connections in the product plane bundle `U × Π` preserving the area form,
//! in the trivialization `e1 = a`, `e2 = c` (so `Ω(e1, e2) = 1`). Components
//! `Γ^l_{jk}` are defined by `∇̄_j e_k = Γ^l_{jk} e_l`; with
//! `A_j[l][k] = Γ^l_{jk}` this reads `∇̄_j v = ∂_j v + A_j v`.
//!
//! Curvature follows the sign convention `R̄(u, v) = ∇̄_v∇̄_u − ∇̄_u∇̄_v + ∇̄_[u,v]`,
//! so `R̄(∂1, ∂2) = ∂2 A1 − ∂1 A2 + A2 A1 − A1 A2`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::exppoly::ExpPoly;
use crate::builder::SolutionData;
use crate::error::{Error, Result};
use crate::exactfield::{q, Poly, Q};

pub type Section = [ExpPoly; 2];
pub type EMat2 = [[ExpPoly; 2]; 2];

pub fn mat_mul2(a: &EMat2, b: &EMat2) -> EMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j])))
}

fn mat_add2(a: &EMat2, b: &EMat2) -> EMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][j] + &b[i][j]))
}

fn mat_sub2(a: &EMat2, b: &EMat2) -> EMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][j] - &b[i][j]))
}

fn mat_diff2(a: &EMat2, var: usize) -> EMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].diff(var)))
}

pub fn mat_is_zero2(a: &EMat2) -> bool {
    a.iter().flatten().all(ExpPoly::is_zero)
}

pub fn eval_mat2(a: &EMat2, y: [f64; 2]) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].eval_f64(y[0], y[1])))
}

pub fn eval_section(v: &Section, y: [f64; 2]) -> [f64; 2] {
    [v[0].eval_f64(y[0], y[1]), v[1].eval_f64(y[0], y[1])]
}

/// `Ω(u, v) = u¹v² − u²v¹`.
pub fn omega2(u: &Section, v: &Section) -> ExpPoly {
    &(&u[0] * &v[1]) - &(&u[1] * &v[0])
}

pub fn omega2_f64(u: &[f64; 2], v: &[f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

pub fn section_const(a: i64, c: i64) -> Section {
    [ExpPoly::constant(q(a)), ExpPoly::constant(q(c))]
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PlaneConnection {
    /// `gamma[j][l][k] = Γ^l_{jk}`
    pub gamma: [[[ExpPoly; 2]; 2]; 2],
}

impl PlaneConnection {
    pub fn flat() -> Self {
        Self::default()
    }

    pub fn from_matrices(a1: EMat2, a2: EMat2) -> Self {
        PlaneConnection { gamma: [a1, a2] }
    }

    /// `A_j`, with `A_j[l][k] = Γ^l_{jk}`.
    pub fn matrix(&self, j: usize) -> &EMat2 {
        &self.gamma[j]
    }

    pub fn covariant(&self, j: usize, v: &Section) -> Section {
        let a = &self.gamma[j];
        std::array::from_fn(|l| &(&v[l].diff(j) + &(&a[l][0] * &v[0])) + &(&a[l][1] * &v[1]))
    }

    /// `R̄(∂1, ∂2)` as an endomorphism field.
    pub fn curvature(&self) -> EMat2 {
        let (a1, a2) = (&self.gamma[0], &self.gamma[1]);
        let d = mat_sub2(&mat_diff2(a1, 1), &mat_diff2(a2, 0));
        mat_add2(&d, &mat_sub2(&mat_mul2(a2, a1), &mat_mul2(a1, a2)))
    }

    /// `∇̄Ω = 0` iff both connection matrices are trace-free.
    pub fn is_omega_compatible(&self) -> bool {
        self.gamma.iter().all(|a| (&a[0][0] + &a[1][1]).is_zero())
    }

    /// `(δ, ε)` with `∇̄1 = ∂1 + δ`, `∇̄2 = ∂2 + 2ε`.
    pub fn delta_epsilon(&self) -> (EMat2, EMat2) {
        let half = crate::exactfield::qr(1, 2);
        let eps = std::array::from_fn(|i| std::array::from_fn(|j| self.gamma[1][i][j].scale(&half)));
        (self.gamma[0].clone(), eps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionPair {
    pub c: Section,
    pub q: Section,
}

/// `(q, λ, μ) ↦ (q, ∇̄)` with `∇̄1 = ∂1 + Ω⁻¹λ`, `∇̄2 = ∂2 + 2Ω⁻¹μ`; `c`
/// becomes the constant section `e2`.
pub fn to_connection_pair(sol: &SolutionData) -> (PlaneConnection, SectionPair) {
    let raise = |cc: &Poly, ca: &Poly, aa: &Poly, s: &Q| -> EMat2 {
        [
            [ExpPoly::from(ca.scale(s)), ExpPoly::from(cc.scale(s))],
            [ExpPoly::from(aa.scale(&-s)), ExpPoly::from(ca.scale(&-s))],
        ]
    };
    let a1 = raise(&sol.lambda_cc, &sol.lambda_ca, &sol.lambda_aa, &q(1));
    let a2 = raise(&sol.mu_cc, &sol.mu_ca, &sol.mu_aa, &q(2));
    let sp = SectionPair {
        c: section_const(0, 1),
        q: [ExpPoly::from(-&sol.omega_cq), ExpPoly::from(sol.omega_aq.clone())],
    };
    (PlaneConnection::from_matrices(a1, a2), sp)
}

/// Inverse of [`to_connection_pair`]; needs polynomial components and
/// `c = e2`.
pub fn to_solution_data(conn: &PlaneConnection, sp: &SectionPair, k: Q) -> Result<SolutionData> {
    if sp.c != section_const(0, 1) {
        return Err(Error::Parse("section c must be the constant e2".into()));
    }
    if !conn.is_omega_compatible() {
        return Err(Error::NotTraceFree);
    }
    let poly = |e: &ExpPoly| -> Result<Poly> {
        e.as_poly().ok_or_else(|| Error::Parse(format!("non-polynomial component {e}")))
    };
    let a1 = &conn.gamma[0];
    let half = crate::exactfield::qr(1, 2);
    let a2: EMat2 = std::array::from_fn(|i| std::array::from_fn(|j| conn.gamma[1][i][j].scale(&half)));
    let mut sol = SolutionData::zero(k);
    sol.lambda_cc = poly(&a1[0][1])?;
    sol.lambda_ca = poly(&a1[0][0])?;
    sol.lambda_aa = -&poly(&a1[1][0])?;
    sol.mu_cc = poly(&a2[0][1])?;
    sol.mu_ca = poly(&a2[0][0])?;
    sol.mu_aa = -&poly(&a2[1][0])?;
    sol.omega_cq = -&poly(&sp.q[0])?;
    sol.omega_aq = poly(&sp.q[1])?;
    sol.check_base_only()?;
    Ok(sol)
}

/// Residuals of the curvature condition `R̄(∂1,∂2) = KΩ(c,·)q + KΩ(q,·)c`
/// and of the scalar condition `Ω(c, ∇̄1∇̄1c − 2∇̄2q) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrdResidual {
    pub curvature: EMat2,
    pub scalar: ExpPoly,
}

impl BrdResidual {
    pub fn is_zero(&self) -> bool {
        mat_is_zero2(&self.curvature) && self.scalar.is_zero()
    }
}

/// `Ξ v = Ω(c, v) q + Ω(q, v) c` as a matrix.
pub fn xi_endomorphism(sp: &SectionPair) -> EMat2 {
    let om_c = [-&sp.c[1], sp.c[0].clone()];
    let om_q = [-&sp.q[1], sp.q[0].clone()];
    std::array::from_fn(|l| std::array::from_fn(|k| &(&om_c[k] * &sp.q[l]) + &(&om_q[k] * &sp.c[l])))
}

/// `Ω(c, ∇̄1∇̄1c − 2∇̄2q)`
pub fn brd_scalar(conn: &PlaneConnection, sp: &SectionPair) -> ExpPoly {
    let d11 = conn.covariant(0, &conn.covariant(0, &sp.c));
    let d2q = conn.covariant(1, &sp.q);
    let v: Section = std::array::from_fn(|i| &d11[i] - &d2q[i].scale(&q(2)));
    omega2(&sp.c, &v)
}

pub fn residual_brd(conn: &PlaneConnection, sp: &SectionPair, k: &Q) -> BrdResidual {
    let xi = xi_endomorphism(sp);
    let kxi: EMat2 = std::array::from_fn(|i| std::array::from_fn(|j| xi[i][j].scale(k)));
    BrdResidual {
        curvature: mat_sub2(&conn.curvature(), &kxi),
        scalar: &brd_scalar(conn, sp) - &ExpPoly::one(),
    }
}

/// Position of `c` and `Kq` at a point, which fixes the eigenstructure of
/// `R̄(∂1,∂2)` once the curvature condition holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SectionPosition {
    /// `c`, `Kq` independent: eigenvectors for `±KΩ(q,c)`.
    Independent,
    /// `Kq` a nonzero multiple of `c`: `c` spans kernel and image.
    Parallel,
    /// `Kq = 0`: the curvature vanishes.
    Vanishing,
}

pub fn section_position(sp: &SectionPair, k: &Q, y: [f64; 2], tol: f64) -> SectionPosition {
    let kf = crate::exactfield::q_to_f64(k);
    let c = eval_section(&sp.c, y);
    let kq = eval_section(&sp.q, y).map(|x| kf * x);
    if kq.iter().all(|x| x.abs() <= tol) {
        SectionPosition::Vanishing
    } else if omega2_f64(&c, &kq).abs() <= tol {
        SectionPosition::Parallel
    } else {
        SectionPosition::Independent
    }
}

/// The local normal forms of connections with `∇̄Ω = 0` in general position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalCase {
    Ia,
    Ib,
    Ic,
    II,
    III,
}

impl FromStr for NormalCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Ia" | "I-a" => Ok(NormalCase::Ia),
            "Ib" | "I-b" => Ok(NormalCase::Ib),
            "Ic" | "I-c" => Ok(NormalCase::Ic),
            "II" => Ok(NormalCase::II),
            "III" => Ok(NormalCase::III),
            other => Err(Error::UnknownCase(other.to_string())),
        }
    }
}

/// `ψ, χ` functions of `(y1, y2)`; `p` a function of `y1`. In case (I-b) `ψ`
/// supplies the free `Γ¹₁₁`, in (I-c) the free `Γ²₁₁`, in (II) the two free
/// entries are `Γ¹₁₁ = ψ`, `Γ²₂₂ = χ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalFormData {
    #[serde(default)]
    pub psi: Poly,
    #[serde(default)]
    pub chi: Poly,
    #[serde(default)]
    pub p: Poly,
}

pub fn connection_normal_form(case: NormalCase, data: &NormalFormData) -> Result<PlaneConnection> {
    if (1..4).any(|v| data.p.involves(v)) {
        return Err(Error::Parse(format!("p must depend on y1 only: {}", data.p)));
    }
    for f in [&data.psi, &data.chi] {
        if f.involves(2) || f.involves(3) {
            return Err(Error::Parse(format!("expected a function of (y1, y2): {f}")));
        }
    }
    let e = |p: Poly| ExpPoly::from(p);
    let (psi, chi) = (&data.psi, &data.chi);
    let mut g: [[[ExpPoly; 2]; 2]; 2] = Default::default();
    let two = q(2);
    if matches!(case, NormalCase::Ia | NormalCase::Ib | NormalCase::Ic) {
        g[0][0][1] = ExpPoly::exp(chi.scale(&two));
        g[1][1][1] = e(chi.diff(1));
        g[1][0][0] = e(-&chi.diff(1));
        g[1][0][1] = ExpPoly::zero();
    }
    match case {
        NormalCase::Ia => {
            g[0][0][0] = e(psi.diff(0));
            g[0][1][1] = e(-&psi.diff(0));
            g[0][1][0] = ExpPoly::zero();
            g[1][1][0] = ExpPoly::exp(psi.scale(&two));
        }
        NormalCase::Ib => {
            g[0][0][0] = e(psi.clone());
            g[0][1][1] = e(-psi);
            g[0][1][0] = ExpPoly::term(data.p.clone(), chi.scale(&q(-2)));
            g[1][1][0] = ExpPoly::zero();
        }
        NormalCase::Ic => {
            let t = &data.p - &chi.diff(0);
            g[0][0][0] = e(t.clone());
            g[0][1][1] = e(-&t);
            g[0][1][0] = e(psi.clone());
            g[1][1][0] = ExpPoly::zero();
        }
        NormalCase::II => {
            g[0][0][0] = e(psi.clone());
            g[0][1][1] = e(-psi);
            g[1][1][1] = e(chi.clone());
            g[1][0][0] = e(-chi);
        }
        NormalCase::III => {}
    }
    Ok(PlaneConnection { gamma: g })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionClass {
    /// `tr R̄² > 0`
    Positive,
    /// `tr R̄² = 0`, `R̄ ≠ 0`
    NullNonzero,
    /// `R̄ ≡ 0`
    Flat,
    /// `tr R̄² < 0`: none of the three cases
    Negative,
    /// at a transition point between the cases
    Indeterminate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointClass {
    pub y: [f64; 2],
    pub class: ConnectionClass,
    pub tr_r2: f64,
    /// `|tr R̄|`, zero up to rounding for compatible connections
    pub trace: f64,
    /// `|R̄² + det(R̄) Id|`
    pub square_defect: f64,
    /// eigenvectors for `+κ` and `−κ` in the positive case
    pub eigenlines: Option<[[f64; 2]; 2]>,
    /// kernel (= image) direction in the null case
    pub kernel: Option<[f64; 2]>,
    /// nonvanishing of the fundamental tensor of the kernel line
    pub fundamental_nonzero: Option<bool>,
}

/// Pointwise trichotomy of `tr R̄(∂1,∂2)²`, with exact detection of
/// identically vanishing quantities and threshold `tol` at sample points.
pub fn classify_connection(conn: &PlaneConnection, points: &[[f64; 2]], tol: f64) -> Vec<PointClass> {
    let r = conn.curvature();
    let flat = mat_is_zero2(&r);
    let r2 = mat_mul2(&r, &r);
    let tr2 = &r2[0][0] + &r2[1][1];
    let tr2_zero = tr2.is_zero();
    let kernels = [[r[0][1].clone(), -&r[0][0]], [r[1][1].clone(), -&r[1][0]]];
    let fundamentals: Vec<[ExpPoly; 2]> = kernels
        .iter()
        .map(|v| [omega2(v, &conn.covariant(0, v)), omega2(v, &conn.covariant(1, v))])
        .collect();
    crate::par::map_slice(points, |y| {
        let y = *y;
        let rv = eval_mat2(&r, y);
        let t = tr2.eval_f64(y[0], y[1]);
        let det = rv[0][0] * rv[1][1] - rv[0][1] * rv[1][0];
        let r2v = eval_mat2(&r2, y);
        let square_defect = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (r2v[i][j] + if i == j { det } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let norm = rv.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        let mut pc = PointClass {
            y,
            class: ConnectionClass::Indeterminate,
            tr_r2: t,
            trace: (rv[0][0] + rv[1][1]).abs(),
            square_defect,
            eigenlines: None,
            kernel: None,
            fundamental_nonzero: None,
        };
        if flat {
            pc.class = ConnectionClass::Flat;
        } else if tr2_zero || t.abs() <= tol {
            if norm <= tol || !tr2_zero {
                pc.class = ConnectionClass::Indeterminate;
            } else {
                pc.class = ConnectionClass::NullNonzero;
                let cand: Vec<[f64; 2]> = kernels.iter().map(|v| eval_section(v, y)).collect();
                let pick = if cand[0][0].hypot(cand[0][1]) >= cand[1][0].hypot(cand[1][1]) { 0 } else { 1 };
                pc.kernel = Some(cand[pick]);
                let f = &fundamentals[pick];
                pc.fundamental_nonzero = Some(f.iter().any(|e| e.eval_f64(y[0], y[1]).abs() > tol));
            }
        } else if t > 0.0 {
            pc.class = ConnectionClass::Positive;
            let kappa = (t / 2.0).sqrt();
            let (al, be, ga) = (rv[0][0], rv[0][1], rv[1][0]);
            let eig = |k: f64| -> [f64; 2] {
                let a = [be, k - al];
                let b = [k + al, ga];
                if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b }
            };
            pc.eigenlines = Some([eig(kappa), eig(-kappa)]);
        } else {
            pc.class = ConnectionClass::Negative;
        }
        pc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_case_is_rejected() {
        assert!(matches!("IV".parse::<NormalCase>(), Err(Error::UnknownCase(_))));
        assert_eq!("I-c".parse::<NormalCase>().unwrap(), NormalCase::Ic);
    }

    #[test]
    fn flat_case_is_flat() {
        let c = connection_normal_form(NormalCase::III, &NormalFormData::default()).unwrap();
        assert!(mat_is_zero2(&c.curvature()));
    }
}
