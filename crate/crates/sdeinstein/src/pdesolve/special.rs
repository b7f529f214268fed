//! Gauge fixing of a section pair, the flat-connection branch and the
//! `K = 0` family.

use serde::{Deserialize, Serialize};

use super::characteristics::{characteristics_solve, CharGrid, InitialCurve, QuasiLinearPDE, SampledSolution};
use super::connection::{
    brd_scalar, eval_mat2, omega2, residual_brd, to_solution_data, PlaneConnection, Section, SectionPair,
};
use super::exppoly::{ExpPoly, NumExpPoly};
use crate::builder::SolutionData;
use crate::error::{Error, Result};
use crate::exactfield::{q, qr, NumPoly, Poly, Q};
use crate::par;

struct NumSection([NumExpPoly; 2]);

impl NumSection {
    fn new(s: &Section) -> Self {
        NumSection([s[0].numeric(), s[1].numeric()])
    }

    fn at(&self, y1: f64, y2: f64) -> [f64; 2] {
        [self.0[0].eval(y1, y2), self.0[1].eval(y1, y2)]
    }
}

fn om(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// The equation for `z` making `(zc, z⁻¹q)` satisfy
/// `Ω(c, ∇̄1∇̄1c − 2∇̄2q) = 1`: `ρ = Ω(c,∇̄1c) z²`, `σ = Ω(c,q)`,
/// `χ = z [1 + 2Ω(c,∇̄2q) − z² Ω(c,∇̄1∇̄1c)] / 2`.
pub fn gauge_pde(conn: &PlaneConnection, sp: &SectionPair) -> QuasiLinearPDE {
    let d1c = conn.covariant(0, &sp.c);
    let d11c = conn.covariant(0, &d1c);
    let d2q = conn.covariant(1, &sp.q);
    let w1 = omega2(&sp.c, &d1c).numeric();
    let s = omega2(&sp.c, &sp.q).numeric();
    let b = omega2(&sp.c, &d2q).numeric();
    let dd = omega2(&sp.c, &d11c).numeric();
    QuasiLinearPDE::new(
        move |y1, y2, z| w1.eval(y1, y2) * z * z,
        move |y1, y2, _| s.eval(y1, y2),
        move |y1, y2, z| z * (1.0 + 2.0 * b.eval(y1, y2) - z * z * dd.eval(y1, y2)) / 2.0,
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GaugeFix {
    pub z: SampledSolution,
    /// max `|Ω(c, ∇̄1∇̄1c − 2∇̄2q) − 1|` for the input pair
    pub scalar_residual_before: f64,
    /// the same for `(zc, z⁻¹q)`, derivatives of `z` by finite differences
    pub scalar_residual_after: f64,
    /// max of the curvature-condition residual, which the rescaling preserves
    pub curvature_residual: f64,
    pub curvature_exact: bool,
    pub points: usize,
}

/// Replace `(c, q)` by `(zc, z⁻¹q)` with `z` from the method of
/// characteristics, `z` prescribed along `ic`.
pub fn gauge_fix(
    conn: &PlaneConnection,
    sp: &SectionPair,
    k: &Q,
    ic: &InitialCurve,
    grid: &CharGrid,
    h: f64,
) -> Result<GaugeFix> {
    let pde = gauge_pde(conn, sp);
    let zs = characteristics_solve(&pde, ic, grid)?;
    let sign = ic.z0(0.0).signum();
    for k_ in 0..zs.t.len() {
        for j in 0..zs.u.len() {
            if let Some(z) = zs.get(k_, j) {
                if z == 0.0 || z.signum() != sign {
                    let (y1, y2) = zs.point(k_, j);
                    return Err(Error::ZeroCrossing(y1, y2));
                }
            }
        }
    }
    let c = NumSection::new(&sp.c);
    let qn = NumSection::new(&sp.q);
    let d1c = conn.covariant(0, &sp.c);
    let d11c = NumSection::new(&conn.covariant(0, &d1c));
    let d1c = NumSection::new(&d1c);
    let d2q = NumSection::new(&conn.covariant(1, &sp.q));
    let before = (&brd_scalar(conn, sp) - &ExpPoly::one()).numeric();
    let res = residual_brd(conn, sp, k);
    let curvature_exact = super::connection::mat_is_zero2(&res.curvature);
    let rows = par::map_range(zs.t.len(), |kk| {
        let mut acc = (0.0f64, 0.0f64, 0.0f64, 0usize);
        for j in 0..zs.u.len() {
            let Some(z) = zs.get(kk, j) else { continue };
            let (Some((z1, z2)), Some(z11)) = (zs.gradient(kk, j, h), zs.second_y1(kk, j, h)) else { continue };
            let (y1, y2) = zs.point(kk, j);
            let (cv, qv, a1, a11, b2) = (c.at(y1, y2), qn.at(y1, y2), d1c.at(y1, y2), d11c.at(y1, y2), d2q.at(y1, y2));
            let zc = [z * cv[0], z * cv[1]];
            let v: [f64; 2] = std::array::from_fn(|i| {
                let dd = z11 * cv[i] + 2.0 * z1 * a1[i] + z * a11[i];
                let d2 = -z2 / (z * z) * qv[i] + b2[i] / z;
                dd - 2.0 * d2
            });
            let after = (om(zc, v) - 1.0).abs();
            let rc = eval_mat2(&res.curvature, [y1, y2]).iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            acc.0 = acc.0.max(before.eval(y1, y2).abs());
            acc.1 = acc.1.max(after);
            acc.2 = acc.2.max(rc);
            acc.3 += 1;
        }
        acc
    });
    let (b, a, r, n) = rows
        .into_iter()
        .fold((0.0f64, 0.0f64, 0.0f64, 0usize), |s, x| (s.0.max(x.0), s.1.max(x.1), s.2.max(x.2), s.3 + x.3));
    Ok(GaugeFix {
        z: zs,
        scalar_residual_before: b,
        scalar_residual_after: a,
        curvature_residual: r,
        curvature_exact,
        points: n,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlatSolution {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// argument `σ[k][j]` at `(y1[j], y2[k])`
    pub sigma: Vec<Vec<f64>>,
    /// `c = ρ (cos σ) e1 + ρ (sin σ) e2` in a parallel frame
    pub c: Vec<Vec<[f64; 2]>>,
    /// max `|Ω(c, ∇̄1∇̄1c) − 1|` by finite differences
    pub residual_max: f64,
    pub points: usize,
}

/// Flat connection, `q = 0`: solve `(ρ²σ₁)₁ = 1` by `σ₁ = (y1 + C(y2))/ρ²`
/// and quadrature in `y1` from `σ(0, y2) = D(y2)`, on the square
/// `[−extent, extent]²` with spacing `step`.
pub fn flat_case_solve(rho: &Poly, c_fn: &Poly, d_fn: &Poly, step: f64, extent: f64, h: f64) -> Result<FlatSolution> {
    if !(step > 0.0 && extent > 0.0) {
        return Err(Error::Parse("step and extent must be positive".into()));
    }
    let n = (extent / step).round() as usize;
    let nodes: Vec<f64> = (0..=2 * n).map(|i| (i as f64 - n as f64) * step).collect();
    let (rn, cn, dn) = (NumPoly::from(rho), NumPoly::from(c_fn), NumPoly::from(d_fn));
    let at = |p: &NumPoly, y1: f64, y2: f64| p.eval(&[y1, y2, 0.0, 0.0]);
    for &y1 in &nodes {
        for &y2 in &nodes {
            if at(&rn, y1, y2) <= 0.0 {
                return Err(Error::Parse(format!("ρ must be positive, fails at ({y1}, {y2})")));
            }
        }
    }
    // 3-point Gauss–Legendre per interval
    let gl = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    let s1 = |y1: f64, y2: f64| (y1 + at(&cn, y1, y2)) / at(&rn, y1, y2).powi(2);
    let sigma: Vec<Vec<f64>> = par::map_slice(&nodes, |&y2| {
        let mut row = vec![0.0; nodes.len()];
        row[n] = at(&dn, 0.0, y2);
        let seg = |a: f64, b: f64| -> f64 {
            let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
            gl.iter().map(|(x, w)| w * r * s1(m + r * x, y2)).sum()
        };
        for i in n + 1..nodes.len() {
            row[i] = row[i - 1] + seg(nodes[i - 1], nodes[i]);
        }
        for i in (0..n).rev() {
            row[i] = row[i + 1] - seg(nodes[i], nodes[i + 1]);
        }
        row
    });
    let c: Vec<Vec<[f64; 2]>> = nodes
        .iter()
        .enumerate()
        .map(|(k, &y2)| {
            nodes
                .iter()
                .enumerate()
                .map(|(j, &y1)| {
                    let r = at(&rn, y1, y2);
                    [r * sigma[k][j].cos(), r * sigma[k][j].sin()]
                })
                .collect()
        })
        .collect();
    let m = ((h / step).round() as usize).max(1);
    let hh = m as f64 * step;
    let mut residual_max: f64 = 0.0;
    let mut points = 0;
    for k in 0..nodes.len() {
        for j in 2 * m..nodes.len().saturating_sub(2 * m) {
            let d2: [f64; 2] = std::array::from_fn(|i| {
                let f = |s: isize| c[k][(j as isize + s * m as isize) as usize][i];
                (-f(2) + 16.0 * f(1) - 30.0 * f(0) + 16.0 * f(-1) - f(-2)) / (12.0 * hh * hh)
            });
            residual_max = residual_max.max((om(c[k][j], d2) - 1.0).abs());
            points += 1;
        }
    }
    Ok(FlatSolution { y1: nodes.clone(), y2: nodes, sigma, c, residual_max, points })
}

#[derive(Clone, Debug)]
pub struct K0Solution {
    pub connection: PlaneConnection,
    pub pair: SectionPair,
    pub solution: SolutionData,
}

fn pmat_mul(a: &[[Poly; 2]; 2], b: &[[Poly; 2]; 2]) -> [[Poly; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j])))
}

fn pmat_vec(a: &[[Poly; 2]; 2], v: &[Poly; 2]) -> [Poly; 2] {
    std::array::from_fn(|i| &(&a[i][0] * &v[0]) + &(&a[i][1] * &v[1]))
}

/// `K = 0`: the flat connection `∇̄ = ∂ + G⁻¹dG` for a polynomial `G` with
/// `det G = 1`, `c = e2`, `a = e1 + t e2`, and `q` from
/// `2∇̄2q = a + χc + ∇̄1∇̄1c`, i.e.
/// `Gq = ½∫₀^{y2} [G(a + χc) + ∂1²(Gc)] dy2 + h(y1)`.
pub fn k0_solve(g: &[[Poly; 2]; 2], t: &Poly, chi: &Poly, h: &[Poly; 2]) -> Result<K0Solution> {
    let det = &(&g[0][0] * &g[1][1]) - &(&g[0][1] * &g[1][0]);
    if det != Poly::one() {
        return Err(Error::Parse(format!("det G must be 1, got {det}")));
    }
    for p in h {
        if (1..4).any(|v| p.involves(v)) {
            return Err(Error::Parse(format!("h must depend on y1 only: {p}")));
        }
    }
    let ginv = [[g[1][1].clone(), -&g[0][1]], [-&g[1][0], g[0][0].clone()]];
    let dg = |j: usize| -> [[Poly; 2]; 2] { std::array::from_fn(|r| std::array::from_fn(|s| g[r][s].diff(j))) };
    let to_e = |m: [[Poly; 2]; 2]| -> [[ExpPoly; 2]; 2] {
        std::array::from_fn(|r| std::array::from_fn(|s| ExpPoly::from(m[r][s].clone())))
    };
    let conn = PlaneConnection::from_matrices(to_e(pmat_mul(&ginv, &dg(0))), to_e(pmat_mul(&ginv, &dg(1))));
    let c = [Poly::zero(), Poly::one()];
    let a = [Poly::one(), t.clone()];
    let gc = pmat_vec(g, &c);
    let src: [Poly; 2] = {
        let ac = [a[0].clone(), &a[1] + chi];
        let gac = pmat_vec(g, &ac);
        std::array::from_fn(|i| &gac[i] + &gc[i].diff(0).diff(0))
    };
    let gq: [Poly; 2] = std::array::from_fn(|i| &src[i].integrate(1).scale(&qr(1, 2)) + &h[i]);
    let qv = pmat_vec(&ginv, &gq);
    let pair = SectionPair {
        c: [ExpPoly::zero(), ExpPoly::one()],
        q: [ExpPoly::from(qv[0].clone()), ExpPoly::from(qv[1].clone())],
    };
    let solution = to_solution_data(&conn, &pair, q(0))?;
    Ok(K0Solution { connection: conn, pair, solution })
}
