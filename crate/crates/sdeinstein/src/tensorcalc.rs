//! Coordinate tensor calculus on a 4-dimensional chart over [`RatFn`].
//!
//! Curvature convention: `R_{jklp}` is stored with the first pair as the
//! 2-form slot, normalised so that a space of constant curvature `K` has
//! `R_{jklp} = K (g_jl g_kp - g_kl g_jp)`. Internally
//! `R_{jklp} = g_{le} R^e_{pjk}` with
//! `R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}`.
//! Ricci contracts the first and third slots: `Ric_{kp} = g^{jl} R_{jklp}`,
//! which gives `Ric = 3K g` for the Einstein metrics built here.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactfield::numeric::five_point;
use crate::exactfield::{ExactPoint, NumRatFn, Q, RatFn};
use crate::par;

pub const N: usize = 4;

pub type Mat4 = [[RatFn; N]; N];
pub type NumMat4 = [[f64; N]; N];

/// Build a 4x4 array from an index function.
pub fn mat4<T, F: FnMut(usize, usize) -> T>(mut f: F) -> [[T; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn zero_mat4() -> Mat4 {
    mat4(|_, _| RatFn::zero())
}

/// Metric on the chart `(y1, y2, x1, x2)` with an orientation sign attached
/// to that coordinate order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartMetric {
    #[serde(default = "default_coords")]
    pub coords: [String; N],
    pub orientation: i8,
    pub g: Mat4,
}

fn default_coords() -> [String; N] {
    ["y1", "y2", "x1", "x2"].map(String::from)
}

impl ChartMetric {
    pub fn new(g: Mat4, orientation: i8) -> Self {
        ChartMetric { coords: default_coords(), orientation, g }
    }

    pub fn with_orientation(&self, o: i8) -> Self {
        ChartMetric { orientation: o, ..self.clone() }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..N).all(|i| (0..i).all(|j| self.g[i][j] == self.g[j][i]))
    }

    pub fn scaled(&self, c: &Q) -> Self {
        ChartMetric { g: mat4(|i, j| self.g[i][j].scale(c)), ..self.clone() }
    }

    pub fn eval(&self, p: &ExactPoint) -> Result<Vec<Vec<Q>>> {
        (0..N).map(|i| (0..N).map(|j| self.g[i][j].eval(p)).collect()).collect()
    }

    pub fn numeric(&self) -> [[NumRatFn; N]; N] {
        mat4(|i, j| NumRatFn::from(&self.g[i][j]))
    }
}

fn det3(m: &Mat4, rows: [usize; 3], cols: [usize; 3]) -> RatFn {
    let e = |r: usize, c: usize| &m[rows[r]][cols[c]];
    let t1 = e(0, 0) * &(&(e(1, 1) * e(2, 2)) - &(e(1, 2) * e(2, 1)));
    let t2 = e(0, 1) * &(&(e(1, 0) * e(2, 2)) - &(e(1, 2) * e(2, 0)));
    let t3 = e(0, 2) * &(&(e(1, 0) * e(2, 1)) - &(e(1, 1) * e(2, 0)));
    &(&t1 - &t2) + &t3
}

fn others(i: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for j in 0..N {
        if j != i {
            out[k] = j;
            k += 1;
        }
    }
    out
}

pub fn det4(m: &Mat4) -> RatFn {
    let mut acc = RatFn::zero();
    for j in 0..N {
        if m[0][j].is_zero() {
            continue;
        }
        let minor = det3(m, [1, 2, 3], others(j));
        let t = &m[0][j] * &minor;
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

/// Exact inverse by the adjugate.
pub fn metric_inverse(m: &ChartMetric) -> Result<Mat4> {
    let det = det4(&m.g);
    if det.is_zero() {
        return Err(Error::SingularMetric);
    }
    let inv_det = det.inv()?;
    let cof: Vec<RatFn> = par::map_range(N * N, |k| {
        let (i, j) = (k / N, k % N);
        let c = det3(&m.g, others(i), others(j));
        if (i + j) % 2 == 0 { c } else { -c }
    });
    // inverse[i][j] = cofactor[j][i] / det
    Ok(mat4(|i, j| &cof[j * N + i] * &inv_det))
}

/// `gamma[a][b][c] = G^a_{bc}`.
pub type Christoffel = [[[RatFn; N]; N]; N];

pub fn christoffel(m: &ChartMetric, ginv: &Mat4) -> Christoffel {
    // dg[d][b][c] = d_d g_bc
    let dg: Vec<RatFn> = par::map_range(N * N * N, |k| m.g[(k / N) % N][k % N].diff(k / (N * N)));
    let d = |a: usize, b: usize, c: usize| &dg[a * N * N + b * N + c];
    // first kind: G_{d,bc} = (d_b g_dc + d_c g_db - d_d g_bc) / 2
    let half = crate::exactfield::qr(1, 2);
    let first: Vec<RatFn> = par::map_range(N * N * N, |k| {
        let (dd, b, c) = (k / (N * N), (k / N) % N, k % N);
        (&(d(b, dd, c) + d(c, dd, b)) - d(dd, b, c)).scale(&half)
    });
    let flat: Vec<RatFn> = par::map_range(N * N * N, |k| {
        let (a, b, c) = (k / (N * N), (k / N) % N, k % N);
        if c < b {
            return RatFn::zero();
        }
        let mut acc = RatFn::zero();
        for dd in 0..N {
            if !ginv[a][dd].is_zero() {
                acc = &acc + &(&ginv[a][dd] * &first[dd * N * N + b * N + c]);
            }
        }
        acc
    });
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
                flat[a * N * N + lo * N + hi].clone()
            })
        })
    })
}

/// Four-index tensor with flat storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4<T> {
    data: Vec<T>,
}

#[inline]
pub fn idx4(j: usize, k: usize, l: usize, p: usize) -> usize {
    ((j * N + k) * N + l) * N + p
}

impl<T: Clone> Tensor4<T> {
    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> T>(mut f: F) -> Self {
        let mut data = Vec::with_capacity(N * N * N * N);
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    for p in 0..N {
                        data.push(f(j, k, l, p));
                    }
                }
            }
        }
        Tensor4 { data }
    }

    pub fn get(&self, j: usize, k: usize, l: usize, p: usize) -> &T {
        &self.data[idx4(j, k, l, p)]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn map<U: Clone, F: Fn(&T) -> U>(&self, f: F) -> Tensor4<U> {
        Tensor4 { data: self.data.iter().map(f).collect() }
    }
}

impl Tensor4<RatFn> {
    pub fn eval(&self, p: &ExactPoint) -> Result<Tensor4<Q>> {
        let data = self.data.iter().map(|x| x.eval(p)).collect::<Result<Vec<_>>>()?;
        Ok(Tensor4 { data })
    }

    pub fn eval_f64(&self, p: &[f64; N]) -> Tensor4<f64> {
        Tensor4 { data: self.data.iter().map(|x| x.eval_f64(p)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Tensor4 { data: par::map_range(self.data.len(), |i| &self.data[i] - &o.data[i]) }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Tensor4 { data: self.data.iter().map(|x| x.scale(c)).collect() }
    }

    /// Build from a function that is only evaluated on `j<k, l<p`; the rest
    /// is filled by antisymmetry in each pair.
    pub fn from_pair_antisymmetric<F>(f: F) -> Self
    where
        F: Fn(usize, usize, usize, usize) -> RatFn + Sync + Send,
    {
        let pairs = pairs();
        let vals = par::map_range(36, |k| {
            let (a, b) = pairs[k / 6];
            let (c, d) = pairs[k % 6];
            f(a, b, c, d)
        });
        let lookup = |j: usize, k: usize, l: usize, p: usize| -> RatFn {
            if j == k || l == p {
                return RatFn::zero();
            }
            let (s1, a) = pair_index(j, k);
            let (s2, b) = pair_index(l, p);
            let v = &vals[a * 6 + b];
            if s1 * s2 > 0 { v.clone() } else { -v }
        };
        Tensor4::from_fn(lookup)
    }
}

/// The six index pairs `(a,b)`, `a<b`, in the fixed 2-form basis order
/// `(01),(02),(03),(12),(13),(23)`.
pub fn pairs() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

/// Position of `{j,k}` in [`pairs`] and the sign of the permutation.
pub fn pair_index(j: usize, k: usize) -> (i32, usize) {
    let (s, a, b) = if j < k { (1, j, k) } else { (-1, k, j) };
    let pos = pairs().iter().position(|&x| x == (a, b)).expect("distinct indices");
    (s, pos)
}

/// Riemann tensor, all indices down, in the convention documented at the
/// top of this module.
pub fn riemann(m: &ChartMetric, gamma: &Christoffel) -> Tensor4<RatFn> {
    let pr = pairs();
    // mixed[e][p][pair(j,k)] = R^e_{pjk}
    let mixed: Vec<RatFn> = par::map_range(N * N * 6, |idx| {
        let (e, p, pk) = (idx / (N * 6), (idx / 6) % N, idx % 6);
        let (j, k) = pr[pk];
        let mut acc = &gamma[e][k][p].diff(j) - &gamma[e][j][p].diff(k);
        for f in 0..N {
            if !gamma[e][j][f].is_zero() && !gamma[f][k][p].is_zero() {
                acc = &acc + &(&gamma[e][j][f] * &gamma[f][k][p]);
            }
            if !gamma[e][k][f].is_zero() && !gamma[f][j][p].is_zero() {
                acc = &acc - &(&gamma[e][k][f] * &gamma[f][j][p]);
            }
        }
        acc
    });
    Tensor4::from_pair_antisymmetric(|j, k, l, p| {
        let (_, pk) = pair_index(j, k);
        let mut acc = RatFn::zero();
        for e in 0..N {
            let r = &mixed[(e * N + p) * 6 + pk];
            if !m.g[l][e].is_zero() && !r.is_zero() {
                acc = &acc + &(&m.g[l][e] * r);
            }
        }
        acc
    })
}

/// `Ric_{kp} = g^{jl} R_{jklp}`.
pub fn ricci(ginv: &Mat4, r: &Tensor4<RatFn>) -> Mat4 {
    let vals = par::map_range(N * N, |idx| {
        let (k, p) = (idx / N, idx % N);
        if p < k {
            return RatFn::zero();
        }
        let mut acc = RatFn::zero();
        for j in 0..N {
            for l in 0..N {
                let x = r.get(j, k, l, p);
                if !ginv[j][l].is_zero() && !x.is_zero() {
                    acc = &acc + &(&ginv[j][l] * x);
                }
            }
        }
        acc
    });
    mat4(|k, p| if k <= p { vals[k * N + p].clone() } else { vals[p * N + k].clone() })
}

pub fn scalar(ginv: &Mat4, ric: &Mat4) -> RatFn {
    let mut acc = RatFn::zero();
    for k in 0..N {
        for p in 0..N {
            if !ginv[k][p].is_zero() && !ric[k][p].is_zero() {
                acc = &acc + &(&ginv[k][p] * &ric[k][p]);
            }
        }
    }
    acc
}

/// Kulkarni–Nomizu product `(h ⊙ k)_{jklp} = h_jl k_kp + h_kp k_jl - h_jp k_kl - h_kl k_jp`.
pub fn kulkarni_nomizu(h: &Mat4, k: &Mat4) -> Tensor4<RatFn> {
    Tensor4::from_pair_antisymmetric(|j, kk, l, p| {
        let a = &(&h[j][l] * &k[kk][p]) + &(&h[kk][p] * &k[j][l]);
        let b = &(&h[j][p] * &k[kk][l]) + &(&h[kk][l] * &k[j][p]);
        &a - &b
    })
}

/// `(g∧g)_{jklp} = g_jl g_kp - g_kl g_jp`; equals half of `g ⊙ g`.
pub fn kulkarni_gg(m: &ChartMetric) -> Tensor4<RatFn> {
    let g = &m.g;
    Tensor4::from_pair_antisymmetric(|j, k, l, p| &(&g[j][l] * &g[k][p]) - &(&g[k][l] * &g[j][p]))
}

/// Everything curvature-related for one metric.
#[derive(Clone, Debug)]
pub struct CurvatureSet {
    pub ginv: Mat4,
    pub christoffel: Christoffel,
    pub riemann: Tensor4<RatFn>,
    pub ricci: Mat4,
    pub scalar: RatFn,
}

pub fn curvature(m: &ChartMetric) -> Result<CurvatureSet> {
    let ginv = metric_inverse(m)?;
    let christoffel = christoffel(m, &ginv);
    let riemann = riemann(m, &christoffel);
    let ric = ricci(&ginv, &riemann);
    let s = scalar(&ginv, &ric);
    Ok(CurvatureSet { ginv, christoffel, riemann, ricci: ric, scalar: s })
}

/// Components of `Ric - 3K g` that do not vanish identically.
pub fn einstein_residual(m: &ChartMetric, c: &CurvatureSet, k: &Q) -> Vec<((usize, usize), RatFn)> {
    let three_k = k * crate::exactfield::q(3);
    let mut out = Vec::new();
    for i in 0..N {
        for j in i..N {
            let r = &c.ricci[i][j] - &m.g[i][j].scale(&three_k);
            if !r.is_zero() {
                out.push(((i, j), r));
            }
        }
    }
    out
}

/// Weyl tensor `R - K g∧g`, valid for Einstein metrics with scalar `12K`.
pub fn weyl(m: &ChartMetric, c: &CurvatureSet, k: &Q) -> Result<Tensor4<RatFn>> {
    let res = einstein_residual(m, c, k);
    if let Some(((i, j), r)) = res.first() {
        return Err(Error::NotEinstein(format!("Ric - 3Kg at ({i},{j}) = {r}")));
    }
    Ok(c.riemann.sub(&kulkarni_gg(m).scale(k)))
}

/// Weyl tensor from the full Ricci decomposition (any metric):
/// `W = R - 1/2 (Ric - s/4 g) ⊙ g - s/24 g ⊙ g`.
pub fn weyl_general(m: &ChartMetric, c: &CurvatureSet) -> Tensor4<RatFn> {
    let quarter = crate::exactfield::qr(1, 4);
    let s4 = c.scalar.scale(&quarter);
    let trace_free: Mat4 = mat4(|i, j| &c.ricci[i][j] - &(&s4 * &m.g[i][j]));
    let a = kulkarni_nomizu(&trace_free, &m.g).scale(&crate::exactfield::qr(1, 2));
    let gg = kulkarni_nomizu(&m.g, &m.g);
    let s24 = c.scalar.scale(&crate::exactfield::qr(1, 24));
    let b = Tensor4::from_fn(|j, k, l, p| &s24 * gg.get(j, k, l, p));
    c.riemann.sub(&a).sub(&b)
}

/// Covariant derivative of the metric, `nabla_a g_bc`; identically zero for
/// the Levi-Civita connection.
pub fn metric_compatibility(m: &ChartMetric, gamma: &Christoffel) -> Vec<RatFn> {
    par::map_range(N * N * N, |idx| {
        let (a, b, c) = (idx / (N * N), (idx / N) % N, idx % N);
        let mut acc = m.g[b][c].diff(a);
        for d in 0..N {
            acc = &acc - &(&gamma[d][a][b] * &m.g[d][c]);
            acc = &acc - &(&gamma[d][a][c] * &m.g[b][d]);
        }
        acc
    })
}

/// `R_{j[klp]}` cyclic sums; all identically zero.
pub fn first_bianchi(r: &Tensor4<RatFn>) -> Vec<RatFn> {
    let mut out = Vec::new();
    for j in 0..N {
        for k in 0..N {
            for l in 0..N {
                for p in 0..N {
                    let s = &(r.get(j, k, l, p) + r.get(j, l, p, k)) + r.get(j, p, k, l);
                    out.push(s);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Numeric mirror: curvature from finite differences of the metric alone.

fn num_inverse(g: &NumMat4) -> Option<NumMat4> {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let inv = m.try_inverse()?;
    Some(mat4(|i, j| inv[(i, j)]))
}

fn shifted(p: &[f64; N], i: usize, t: f64) -> [f64; N] {
    let mut q = *p;
    q[i] += t;
    q
}

/// Christoffel symbols at `p` using five-point derivatives of `g`.
pub fn numeric_christoffel<G>(g: &G, p: &[f64; N], h: f64) -> Option<[[[f64; N]; N]; N]>
where
    G: Fn(&[f64; N]) -> NumMat4,
{
    let g0 = g(p);
    let ginv = num_inverse(&g0)?;
    let mut dg = [[[0.0; N]; N]; N];
    for (d, dgd) in dg.iter_mut().enumerate() {
        for b in 0..N {
            for c in b..N {
                let v = five_point(|t| g(&shifted(p, d, t))[b][c], 0.0, h);
                dgd[b][c] = v;
                dgd[c][b] = v;
            }
        }
    }
    let mut out = [[[0.0; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                let mut s = 0.0;
                for d in 0..N {
                    s += ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                }
                out[a][b][c] = 0.5 * s;
            }
        }
    }
    Some(out)
}

/// Riemann tensor (indices down, same convention as [`riemann`]) at `p` by
/// nested finite differences: Christoffels from five-point derivatives of
/// `g`, then five-point derivatives of those.
pub fn numeric_riemann<G>(g: &G, p: &[f64; N], h: f64) -> Option<Tensor4<f64>>
where
    G: Fn(&[f64; N]) -> NumMat4,
{
    let gam = numeric_christoffel(g, p, h)?;
    let mut dgam = [[[[0.0; N]; N]; N]; N]; // dgam[i][a][b][c] = d_i G^a_bc
    for (i, dgi) in dgam.iter_mut().enumerate() {
        let at = |t: f64| numeric_christoffel(g, &shifted(p, i, t), h);
        let (pp2, pp1, mm1, mm2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    dgi[a][b][c] =
                        (-pp2[a][b][c] + 8.0 * pp1[a][b][c] - 8.0 * mm1[a][b][c] + mm2[a][b][c]) / (12.0 * h);
                }
            }
        }
    }
    let g0 = g(p);
    let mixed = |e: usize, pp: usize, j: usize, k: usize| -> f64 {
        let mut s = dgam[j][e][k][pp] - dgam[k][e][j][pp];
        for f in 0..N {
            s += gam[e][j][f] * gam[f][k][pp] - gam[e][k][f] * gam[f][j][pp];
        }
        s
    };
    Some(Tensor4::from_fn(|j, k, l, pp| (0..N).map(|e| g0[l][e] * mixed(e, pp, j, k)).sum()))
}

/// Numeric Ricci from a numeric Riemann tensor.
pub fn numeric_ricci(ginv: &NumMat4, r: &Tensor4<f64>) -> NumMat4 {
    mat4(|k, p| {
        let mut s = 0.0;
        for j in 0..N {
            for l in 0..N {
                s += ginv[j][l] * r.get(j, k, l, p);
            }
        }
        s
    })
}

pub fn numeric_inverse(g: &NumMat4) -> Option<NumMat4> {
    num_inverse(g)
}

/// Numeric metric closure for a chart metric.
pub fn numeric_metric(m: &ChartMetric) -> impl Fn(&[f64; N]) -> NumMat4 + Sync {
    let nm = m.numeric();
    move |p: &[f64; N]| mat4(|i, j| nm[i][j].eval(p))
}

/// Second Bianchi identity `nabla_a R_{jklp} + nabla_l R_{jkpa} + nabla_p R_{jkal}`
/// evaluated in floating point at `p` from exact derivatives of `R`.
/// Returns the largest absolute component.
pub fn second_bianchi_residual(c: &CurvatureSet, p: &[f64; N]) -> f64 {
    let r = c.riemann.eval_f64(p);
    let gm: [[[f64; N]; N]; N] =
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|cc| c.christoffel[a][b][cc].eval_f64(p))));
    // dr[a] = d_a R (exact derivative, evaluated numerically)
    let dr: Vec<Tensor4<f64>> = (0..N)
        .map(|a| Tensor4::from_fn(|j, k, l, pp| c.riemann.get(j, k, l, pp).diff(a).eval_f64(p)))
        .collect();
    let cov = |a: usize, j: usize, k: usize, l: usize, pp: usize| -> f64 {
        let mut s = *dr[a].get(j, k, l, pp);
        for e in 0..N {
            s -= gm[e][a][j] * r.get(e, k, l, pp);
            s -= gm[e][a][k] * r.get(j, e, l, pp);
            s -= gm[e][a][l] * r.get(j, k, e, pp);
            s -= gm[e][a][pp] * r.get(j, k, l, e);
        }
        s
    };
    let mut worst: f64 = 0.0;
    for a in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    for pp in 0..N {
                        let s = cov(a, j, k, l, pp) + cov(l, j, k, pp, a) + cov(pp, j, k, a, l);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
    }
    worst
}
