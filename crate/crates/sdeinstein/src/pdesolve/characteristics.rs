//! Method of characteristics for `ρ z₁ + σ z₂ = χ` with `ρ, σ, χ`
//! functions of `(y1, y2, z)`.
//!
//! The initial curve is a coordinate line. For `axis = y1` it is
//! `{y2 = offset}`, parametrized by `u = y1`, and characteristics are
//! marched in `t = y2` using `dy1/dy2 = ρ/σ`, `dz/dy2 = χ/σ`; for
//! `axis = y2` the roles swap. Every characteristic is integrated with
//! classical RK4 at the grid step, so fan levels coincide with grid rows;
//! grid values come from 6-node Lagrange interpolation across the fan.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactfield::{NumPoly, Poly};
use crate::par;

pub type CoefFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct QuasiLinearPDE {
    pub rho: CoefFn,
    pub sigma: CoefFn,
    pub chi: CoefFn,
}

impl std::fmt::Debug for QuasiLinearPDE {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("QuasiLinearPDE { .. }")
    }
}

impl QuasiLinearPDE {
    pub fn new<R, S, C>(rho: R, sigma: S, chi: C) -> Self
    where
        R: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        QuasiLinearPDE { rho: Arc::new(rho), sigma: Arc::new(sigma), chi: Arc::new(chi) }
    }

    /// Polynomial coefficients in `(y1, y2, z)`, with `z` in the third slot.
    pub fn from_polys(rho: &Poly, sigma: &Poly, chi: &Poly) -> Self {
        let wrap = |p: &Poly| -> CoefFn {
            let n = NumPoly::from(p);
            Arc::new(move |y1, y2, z| n.eval(&[y1, y2, z, 0.0]))
        };
        QuasiLinearPDE { rho: wrap(rho), sigma: wrap(sigma), chi: wrap(chi) }
    }

    pub fn residual(&self, y1: f64, y2: f64, z: f64, z1: f64, z2: f64) -> f64 {
        (self.rho)(y1, y2, z) * z1 + (self.sigma)(y1, y2, z) * z2 - (self.chi)(y1, y2, z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "y1")]
    Y1,
    #[serde(rename = "y2")]
    Y2,
}

/// A coordinate segment with initial values `z0(u) = Σ values[i] uⁱ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCurve {
    pub axis: Axis,
    pub offset: f64,
    pub values: Vec<f64>,
}

impl InitialCurve {
    pub fn z0(&self, u: f64) -> f64 {
        self.values.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// `(y1, y2)` from curve parameter `u` and marching coordinate `t`.
    pub fn point(&self, u: f64, t: f64) -> (f64, f64) {
        match self.axis {
            Axis::Y1 => (u, t),
            Axis::Y2 => (t, u),
        }
    }
}

/// `u ∈ [−extent, extent]` along the curve, `t ∈ [offset, offset + extent]`
/// transversally, both at spacing `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharGrid {
    pub step: f64,
    pub extent: f64,
}

impl CharGrid {
    fn counts(&self) -> (usize, usize) {
        let nu = (2.0 * self.extent / self.step).round() as usize + 1;
        let nt = (self.extent / self.step).round() as usize + 1;
        (nu, nt)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampledSolution {
    pub curve: InitialCurve,
    pub grid: CharGrid,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    /// `z[k][j]` at `(u[j], t[k])`; `None` outside the fan
    pub z: Vec<Vec<Option<f64>>>,
    /// characteristic positions `fan_pos[k][i]` along the curve direction
    #[serde(skip)]
    pub fan_pos: Vec<Vec<f64>>,
    #[serde(skip)]
    pub fan_z: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    /// along the initial curve
    U,
    /// transverse (marching) direction
    T,
}

impl SampledSolution {
    pub fn point(&self, k: usize, j: usize) -> (f64, f64) {
        self.curve.point(self.u[j], self.t[k])
    }

    pub fn get(&self, k: usize, j: usize) -> Option<f64> {
        self.z.get(k)?.get(j).copied().flatten()
    }

    pub fn covered(&self) -> usize {
        self.z.iter().flatten().filter(|v| v.is_some()).count()
    }

    /// Max `|z − exact|` over covered grid points.
    pub fn max_error<F: Fn(f64, f64) -> f64 + Sync + Send>(&self, exact: F) -> f64 {
        let rows = par::map_range(self.t.len(), |k| {
            (0..self.u.len())
                .filter_map(|j| {
                    let z = self.get(k, j)?;
                    let (y1, y2) = self.point(k, j);
                    Some((z - exact(y1, y2)).abs())
                })
                .fold(0.0, f64::max)
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Max `|z − exact|` over the characteristic nodes themselves.
    pub fn fan_max_error<F: Fn(f64, f64) -> f64 + Sync + Send>(&self, exact: F) -> f64 {
        let mut m: f64 = 0.0;
        for (k, row) in self.fan_pos.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                let z = self.fan_z[k][i];
                if p.is_finite() && z.is_finite() {
                    let (y1, y2) = self.curve.point(p, self.t[k]);
                    m = m.max((z - exact(y1, y2)).abs());
                }
            }
        }
        m
    }

    fn offset_nodes(&self, h: f64) -> usize {
        ((h / self.grid.step).round() as usize).max(1)
    }

    /// Five-point first (`order = 1`) or second (`order = 2`) difference
    /// with spacing closest to `h` in grid multiples.
    pub fn fd(&self, k: usize, j: usize, dir: Dir, order: u8, h: f64) -> Option<f64> {
        let m = self.offset_nodes(h);
        let hh = m as f64 * self.grid.step;
        let at = |s: isize| -> Option<f64> {
            let (kk, jj) = match dir {
                Dir::U => (k as isize, j as isize + s * m as isize),
                Dir::T => (k as isize + s * m as isize, j as isize),
            };
            if kk < 0 || jj < 0 {
                return None;
            }
            self.get(kk as usize, jj as usize)
        };
        let (fm2, fm1, f0, fp1, fp2) = (at(-2)?, at(-1)?, at(0)?, at(1)?, at(2)?);
        Some(match order {
            1 => (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * hh),
            _ => (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * hh * hh),
        })
    }

    /// `(∂z/∂y1, ∂z/∂y2)` by finite differences.
    pub fn gradient(&self, k: usize, j: usize, h: f64) -> Option<(f64, f64)> {
        let du = self.fd(k, j, Dir::U, 1, h)?;
        let dt = self.fd(k, j, Dir::T, 1, h)?;
        Some(match self.curve.axis {
            Axis::Y1 => (du, dt),
            Axis::Y2 => (dt, du),
        })
    }

    /// `∂²z/∂y1²` by finite differences.
    pub fn second_y1(&self, k: usize, j: usize, h: f64) -> Option<f64> {
        match self.curve.axis {
            Axis::Y1 => self.fd(k, j, Dir::U, 2, h),
            Axis::Y2 => self.fd(k, j, Dir::T, 2, h),
        }
    }

    /// Max `|ρ z₁ + σ z₂ − χ|` over grid points admitting the stencil, and
    /// the number of such points.
    pub fn pde_residual(&self, pde: &QuasiLinearPDE, h: f64) -> (f64, usize) {
        let rows = par::map_range(self.t.len(), |k| {
            let mut m: f64 = 0.0;
            let mut n = 0usize;
            for j in 0..self.u.len() {
                if let (Some(z), Some((z1, z2))) = (self.get(k, j), self.gradient(k, j, h)) {
                    let (y1, y2) = self.point(k, j);
                    m = m.max(pde.residual(y1, y2, z, z1, z2).abs());
                    n += 1;
                }
            }
            (m, n)
        });
        rows.into_iter().fold((0.0, 0), |(a, n), (b, k)| (a.max(b), n + k))
    }
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

/// Interpolate one fan level onto the grid columns.
fn interpolate_level(pos: &[f64], zs: &[f64], cols: &[f64]) -> Vec<Option<f64>> {
    // longest run of finite nodes
    let mut best = (0, 0);
    let mut start = 0;
    for i in 0..=pos.len() {
        let ok = i < pos.len() && pos[i].is_finite() && zs[i].is_finite();
        if !ok {
            if i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i + 1;
        }
    }
    let (lo, hi) = best;
    if hi - lo < 6 {
        return vec![None; cols.len()];
    }
    let p = &pos[lo..hi];
    let z = &zs[lo..hi];
    cols.iter()
        .map(|&x| {
            if x < p[0] || x > p[p.len() - 1] {
                return None;
            }
            let i = p.partition_point(|&v| v < x);
            let s = i.saturating_sub(3).min(p.len() - 6);
            Some(lagrange(&p[s..s + 6], &z[s..s + 6], x))
        })
        .collect()
}

/// Integrate the characteristic fan and sample `z` on the grid.
pub fn characteristics_solve(pde: &QuasiLinearPDE, ic: &InitialCurve, grid: &CharGrid) -> Result<SampledSolution> {
    if !(grid.step > 0.0 && grid.extent > 0.0) {
        return Err(Error::Parse("grid step and extent must be positive".into()));
    }
    let (nu, nt) = grid.counts();
    let u: Vec<f64> = (0..nu).map(|i| -grid.extent + i as f64 * grid.step).collect();
    let t: Vec<f64> = (0..nt).map(|k| ic.offset + k as f64 * grid.step).collect();
    let axis = ic.axis;
    // transverse speed and derivative field in (position, z) as functions of t
    let field = {
        let pde = pde.clone();
        move |tt: f64, p: f64, z: f64| -> (f64, f64, f64) {
            let (y1, y2) = match axis {
                Axis::Y1 => (p, tt),
                Axis::Y2 => (tt, p),
            };
            let (r, s, c) = ((pde.rho)(y1, y2, z), (pde.sigma)(y1, y2, z), (pde.chi)(y1, y2, z));
            match axis {
                Axis::Y1 => (s, r, c),
                Axis::Y2 => (r, s, c),
            }
        }
    };
    for &ui in &u {
        let (den, _, _) = field(ic.offset, ui, ic.z0(ui));
        if den.abs() < 1e-12 {
            return Err(Error::TangentInitialCurve(ui));
        }
    }
    let h = grid.step;
    let traces: Vec<Result<(Vec<f64>, Vec<f64>)>> = par::map_range(nu, |i| {
        let mut p = u[i];
        let mut z = ic.z0(p);
        let mut ps = Vec::with_capacity(nt);
        let mut zs = Vec::with_capacity(nt);
        ps.push(p);
        zs.push(z);
        let rhs = |tt: f64, p: f64, z: f64| -> std::result::Result<(f64, f64), f64> {
            let (den, num_p, num_z) = field(tt, p, z);
            if den.abs() < 1e-14 {
                return Err(tt);
            }
            Ok((num_p / den, num_z / den))
        };
        let mut alive = true;
        for k in 1..nt {
            if alive {
                let t0 = t[k - 1];
                let step = || -> std::result::Result<(f64, f64), f64> {
                    let k1 = rhs(t0, p, z)?;
                    let k2 = rhs(t0 + h / 2.0, p + h / 2.0 * k1.0, z + h / 2.0 * k1.1)?;
                    let k3 = rhs(t0 + h / 2.0, p + h / 2.0 * k2.0, z + h / 2.0 * k2.1)?;
                    let k4 = rhs(t0 + h, p + h * k3.0, z + h * k3.1)?;
                    Ok((
                        p + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                        z + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
                    ))
                };
                match step() {
                    Ok((np, nz)) if np.is_finite() && nz.is_finite() => {
                        p = np;
                        z = nz;
                    }
                    Ok(_) => alive = false,
                    Err(tt) => return Err(Error::DegenerateCharacteristic(tt)),
                }
            }
            ps.push(if alive { p } else { f64::NAN });
            zs.push(if alive { z } else { f64::NAN });
        }
        Ok((ps, zs))
    });
    let mut fan_pos = vec![vec![f64::NAN; nu]; nt];
    let mut fan_z = vec![vec![f64::NAN; nu]; nt];
    for (i, tr) in traces.into_iter().enumerate() {
        let (ps, zs) = tr?;
        for k in 0..nt {
            fan_pos[k][i] = ps[k];
            fan_z[k][i] = zs[k];
        }
    }
    // fold-over: finite positions must stay strictly increasing
    for k in 0..nt {
        let mut last = f64::NEG_INFINITY;
        for &p in fan_pos[k].iter().filter(|p| p.is_finite()) {
            if p <= last {
                return Err(Error::CharacteristicCrossing(t[k]));
            }
            last = p;
        }
    }
    let z = par::map_range(nt, |k| interpolate_level(&fan_pos[k], &fan_z[k], &u));
    Ok(SampledSolution { curve: ic.clone(), grid: *grid, u, t, z, fan_pos, fan_z })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// `errors[i] / errors[i + 1]`
    pub ratios: Vec<f64>,
}

impl ConvergenceReport {
    pub fn observed_order(&self) -> Vec<f64> {
        self.ratios
            .iter()
            .zip(self.steps.windows(2))
            .map(|(r, w)| r.ln() / (w[0] / w[1]).ln())
            .collect()
    }
}

/// Fan-node errors against a closed-form solution under step refinement.
pub fn convergence_study<F>(
    pde: &QuasiLinearPDE,
    ic: &InitialCurve,
    extent: f64,
    steps: &[f64],
    exact: F,
) -> Result<ConvergenceReport>
where
    F: Fn(f64, f64) -> f64 + Sync + Send + Copy,
{
    let mut errors = Vec::with_capacity(steps.len());
    for &step in steps {
        let sol = characteristics_solve(pde, ic, &CharGrid { step, extent })?;
        errors.push(sol.fan_max_error(exact));
    }
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceReport { steps: steps.to_vec(), errors, ratios })
}
