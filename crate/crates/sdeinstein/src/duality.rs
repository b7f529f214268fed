//! 2-forms in neutral signature: inner product, Hodge star, the splitting
//! `Λ² = Λ⁺ ⊕ Λ⁻`, Petrov type of `W⁺`, its normal triple and the canonical
//! frame.
//!
//! 2-forms are stored either as antisymmetric 4x4 arrays or as coefficient
//! vectors in the basis `dx^a∧dx^b`, `a<b`, ordered
//! `(01),(02),(03),(12),(13),(23)` (see [`crate::tensorcalc::pairs`]).
//! The inner product is `⟨ζ,η⟩ = ½ ζ_{jk} η^{jk}`, and a curvature-type
//! tensor acts by `(Tω)_{jk} = ½ T_{jklp} ω^{lp}`.

use nalgebra::{Matrix3, SVD};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactfield::linalg::{self, QMat, QVec};
use crate::exactfield::{q, q_sqrt, q_to_f64, ExactPoint, Q, RatFn};
use crate::par;
use crate::tensorcalc::{det4, mat4, pairs, ChartMetric, Mat4, Tensor4, N};

pub type Mat6 = [[RatFn; 6]; 6];

fn mat6<F: FnMut(usize, usize) -> RatFn>(mut f: F) -> Mat6 {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

/// Antisymmetric 4x4 array from a coefficient 6-vector.
pub fn form_from_vec(v: &[RatFn; 6]) -> Mat4 {
    let mut out = mat4(|_, _| RatFn::zero());
    for (k, &(a, b)) in pairs().iter().enumerate() {
        out[a][b] = v[k].clone();
        out[b][a] = -&v[k];
    }
    out
}

pub fn form_to_vec(f: &Mat4) -> [RatFn; 6] {
    let p = pairs();
    std::array::from_fn(|k| f[p[k].0][p[k].1].clone())
}

pub fn is_antisymmetric(f: &Mat4) -> bool {
    (0..N).all(|i| f[i][i].is_zero() && (0..i).all(|j| f[i][j] == -&f[j][i]))
}

/// Wedge of two 1-forms: `(a∧b)_{jk} = a_j b_k - b_j a_k`.
pub fn wedge(a: &[RatFn; N], b: &[RatFn; N]) -> Mat4 {
    mat4(|j, k| &(&a[j] * &b[k]) - &(&b[j] * &a[k]))
}

/// `⟨ζ,η⟩ = ½ ζ_{jk} g^{ja} g^{kb} η_{ab}`.
pub fn twoform_inner(ginv: &Mat4, z: &Mat4, e: &Mat4) -> RatFn {
    let gram = gram6(ginv);
    let zv = form_to_vec(z);
    let ev = form_to_vec(e);
    let mut acc = RatFn::zero();
    for i in 0..6 {
        if zv[i].is_zero() {
            continue;
        }
        for j in 0..6 {
            if !ev[j].is_zero() && !gram[i][j].is_zero() {
                acc = &acc + &(&(&zv[i] * &gram[i][j]) * &ev[j]);
            }
        }
    }
    acc
}

/// Gram matrix of `⟨,⟩` on the coordinate basis of `Λ²`:
/// `G_{(jk),(ab)} = g^{ja} g^{kb} - g^{jb} g^{ka}`.
pub fn gram6(ginv: &Mat4) -> Mat6 {
    let p = pairs();
    mat6(|r, c| {
        let (j, k) = p[r];
        let (a, b) = p[c];
        &(&ginv[j][a] * &ginv[k][b]) - &(&ginv[j][b] * &ginv[k][a])
    })
}

/// Matrix of the operator `ω ↦ ½ T_{jklp} ω^{lp}` on coefficient vectors:
/// `M_{(jk),(ab)} = Σ_{l,p} T_{jklp} g^{la} g^{pb}`.
pub fn operator_matrix(t: &Tensor4<RatFn>, ginv: &Mat4) -> Mat6 {
    let p = pairs();
    let vals = par::map_range(36, |idx| {
        let (j, k) = p[idx / 6];
        let (a, b) = p[idx % 6];
        let mut acc = RatFn::zero();
        for l in 0..N {
            if ginv[l][a].is_zero() {
                continue;
            }
            for pp in 0..N {
                let tv = t.get(j, k, l, pp);
                if tv.is_zero() || ginv[pp][b].is_zero() {
                    continue;
                }
                acc = &acc + &(&(tv * &ginv[l][a]) * &ginv[pp][b]);
            }
        }
        acc
    });
    mat6(|r, c| vals[r * 6 + c].clone())
}

fn mat6_mul(a: &Mat6, b: &Mat6) -> Mat6 {
    let vals = par::map_range(36, |idx| {
        let (i, j) = (idx / 6, idx % 6);
        let mut acc = RatFn::zero();
        for k in 0..6 {
            if !a[i][k].is_zero() && !b[k][j].is_zero() {
                acc = &acc + &(&a[i][k] * &b[k][j]);
            }
        }
        acc
    });
    mat6(|i, j| vals[i * 6 + j].clone())
}

fn mat6_is_zero(a: &Mat6) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

fn levi_civita_sign(idx: [usize; 4]) -> i64 {
    let mut v = idx;
    let mut s = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if v[i] == v[j] {
                return 0;
            }
        }
    }
    for i in 0..4 {
        while v[i] != i {
            let t = v[i];
            v.swap(i, t);
            s = -s;
        }
    }
    s
}

/// Hodge star on `Λ²` for a chart metric with its orientation.
#[derive(Clone, Debug)]
pub struct HodgeOperator {
    pub matrix: Mat6,
    /// `sqrt|det g|`, positive where `x2 > 0` for the metrics built here.
    pub volume_density: RatFn,
    pub orientation: i8,
}

/// Exact square root of `|det g|`; requires a monomial determinant.
pub fn volume_density(m: &ChartMetric) -> Result<RatFn> {
    let det = det4(&m.g);
    if det.is_zero() {
        return Err(Error::SingularMetric);
    }
    det.sqrt_monomial()
        .or_else(|| (-&det).sqrt_monomial())
        .ok_or_else(|| Error::NonRationalVolumeDensity(det.to_string()))
}

pub fn hodge_star(m: &ChartMetric, ginv: &Mat4) -> Result<HodgeOperator> {
    let vol = volume_density(m)?;
    let eps = vol.scale(&q(m.orientation as i64));
    let p = pairs();
    let vals = par::map_range(36, |idx| {
        let (j, k) = p[idx / 6];
        let (a, b) = p[idx % 6];
        let mut acc = RatFn::zero();
        for l in 0..N {
            for pp in 0..N {
                let s = levi_civita_sign([j, k, l, pp]);
                if s == 0 {
                    continue;
                }
                let t = &ginv[l][a] * &ginv[pp][b];
                if !t.is_zero() {
                    acc = &acc + &t.scale(&q(s));
                }
            }
        }
        &acc * &eps
    });
    Ok(HodgeOperator { matrix: mat6(|r, c| vals[r * 6 + c].clone()), volume_density: vol, orientation: m.orientation })
}

impl HodgeOperator {
    /// `(I + sign * S) / 2`, the projector onto `Λ^sign`.
    pub fn projector(&self, sign: i8) -> Mat6 {
        let half = crate::exactfield::qr(sign as i64, 2);
        mat6(|i, j| {
            let s = self.matrix[i][j].scale(&half);
            if i == j { &s + &RatFn::constant(crate::exactfield::qr(1, 2)) } else { s }
        })
    }

    pub fn squares_to_identity(&self) -> bool {
        let sq = mat6_mul(&self.matrix, &self.matrix);
        (0..6).all(|i| (0..6).all(|j| sq[i][j] == if i == j { RatFn::one() } else { RatFn::zero() }))
    }
}

/// The Weyl operator and its self-dual / anti-self-dual parts.
#[derive(Clone, Debug)]
pub struct WeylSplit {
    pub full: Mat6,
    pub plus: Mat6,
    pub minus: Mat6,
}

impl WeylSplit {
    pub fn trace(m: &Mat6) -> RatFn {
        (0..6).fold(RatFn::zero(), |acc, i| &acc + &m[i][i])
    }

    pub fn minus_vanishes(&self) -> bool {
        mat6_is_zero(&self.minus)
    }

    pub fn plus_vanishes(&self) -> bool {
        mat6_is_zero(&self.plus)
    }
}

/// `W± = W ∘ P±` as operators on `Λ²`; the Weyl operator commutes with the
/// star, so these are the restrictions to `Λ±`.
pub fn weyl_plus_minus(w: &Tensor4<RatFn>, ginv: &Mat4, h: &HodgeOperator) -> WeylSplit {
    let full = operator_matrix(w, ginv);
    let plus = mat6_mul(&full, &h.projector(1));
    let minus = mat6_mul(&full, &h.projector(-1));
    WeylSplit { full, plus, minus }
}

// ---------------------------------------------------------------------------
// Pointwise (exact rational) machinery.

/// Everything needed for algebra on `Λ²` at one point.
#[derive(Clone, Debug)]
pub struct PointAlgebra {
    pub point: ExactPoint,
    pub g: QMat,
    pub ginv: QMat,
    pub gram: QMat,
    pub star: QMat,
    pub weyl: QMat,
}

fn eval6(m: &Mat6, p: &ExactPoint) -> Result<QMat> {
    m.iter().map(|r| r.iter().map(|x| x.eval(p)).collect()).collect()
}

fn eval4(m: &Mat4, p: &ExactPoint) -> Result<QMat> {
    m.iter().map(|r| r.iter().map(|x| x.eval(p)).collect()).collect()
}

impl PointAlgebra {
    pub fn new(m: &ChartMetric, ginv: &Mat4, h: &HodgeOperator, weyl_op: &Mat6, p: &ExactPoint) -> Result<Self> {
        Ok(PointAlgebra {
            point: p.clone(),
            g: m.eval(p)?,
            ginv: eval4(ginv, p)?,
            gram: eval6(&gram6(ginv), p)?,
            star: eval6(&h.matrix, p)?,
            weyl: eval6(weyl_op, p)?,
        })
    }

    pub fn inner(&self, a: &[Q], b: &[Q]) -> Q {
        linalg::bilinear(&self.gram, a, b)
    }

    pub fn apply_weyl(&self, v: &[Q]) -> QVec {
        linalg::mat_vec(&self.weyl, v)
    }

    fn projector(&self, sign: i8) -> QMat {
        let half = crate::exactfield::qr(1, 2);
        let s = Q::from_integer((sign as i64).into()) * &half;
        (0..6)
            .map(|i| (0..6).map(|j| &self.star[i][j] * &s + if i == j { half.clone() } else { Q::zero() }).collect())
            .collect()
    }

    /// `W^sign` restricted to `Λ^sign` in an orthogonal basis.
    pub fn weyl_endo(&self, sign: i8) -> Result<WeylEndo> {
        let proj = self.projector(sign);
        let cols: Vec<QVec> = (0..6).map(|j| proj.iter().map(|r| r[j].clone()).collect()).collect();
        let basis = orthogonal_basis(&cols, &self.gram);
        if basis.len() != 3 {
            return Err(Error::DegenerateFrame(format!("Λ{} has dimension {}", if sign > 0 { "+" } else { "-" }, basis.len())));
        }
        let norms: Vec<Q> = basis.iter().map(|b| self.inner(b, b)).collect();
        if norms.iter().any(|n| n.is_zero()) {
            return Err(Error::DegenerateFrame("inner product degenerate on Λ±".into()));
        }
        let mut n = linalg::zeros(3, 3);
        for i in 0..3 {
            let wb = self.apply_weyl(&basis[i]);
            for j in 0..3 {
                n[j][i] = self.inner(&wb, &basis[j]) / &norms[j];
            }
        }
        let gram = (0..3).map(|i| (0..3).map(|j| self.inner(&basis[i], &basis[j])).collect()).collect();
        Ok(WeylEndo { n, gram, basis })
    }

    /// Endomorphism `u ↦ ω u` with `g(ωu, w) = ω(u, w)`, i.e. `-g⁻¹ ω`.
    pub fn endomorphism(&self, form6: &[Q]) -> QMat {
        let f = qform_from_vec(form6);
        let m = linalg::mat_mul(&self.ginv, &f);
        m.into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect()
    }
}

pub fn qform_from_vec(v: &[Q]) -> QMat {
    let mut out = linalg::zeros(4, 4);
    for (k, &(a, b)) in pairs().iter().enumerate() {
        out[a][b] = v[k].clone();
        out[b][a] = -v[k].clone();
    }
    out
}

/// Orthogonal basis (w.r.t. a nondegenerate symmetric form) of the span of
/// `cands`. Null candidates are paired: if all remaining vectors are null,
/// some pair `u, w` with `⟨u,w⟩ ≠ 0` is replaced by `u + w`.
pub fn orthogonal_basis(cands: &[QVec], gram: &QMat) -> Vec<QVec> {
    // independent spanning subset first
    let mut span: Vec<QVec> = Vec::new();
    for c in cands {
        let mut trial = span.clone();
        trial.push(c.clone());
        if linalg::rank(&trial) == trial.len() {
            span = trial;
        }
    }
    let mut out = Vec::new();
    let mut rest = span;
    while !rest.is_empty() {
        let pick = rest.iter().position(|v| !linalg::bilinear(gram, v, v).is_zero());
        let e = match pick {
            Some(i) => rest.remove(i),
            None => {
                let mut found = None;
                'outer: for i in 0..rest.len() {
                    for j in i + 1..rest.len() {
                        if !linalg::bilinear(gram, &rest[i], &rest[j]).is_zero() {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                match found {
                    Some((i, j)) => {
                        let s: QVec = rest[i].iter().zip(&rest[j]).map(|(a, b)| a + b).collect();
                        rest.remove(i);
                        s
                    }
                    None => {
                        out.append(&mut rest);
                        break;
                    }
                }
            }
        };
        let ee = linalg::bilinear(gram, &e, &e);
        if !ee.is_zero() {
            for v in rest.iter_mut() {
                let c = linalg::bilinear(gram, v, &e) / &ee;
                for (x, y) in v.iter_mut().zip(&e) {
                    *x -= &c * y;
                }
            }
        }
        out.push(e);
    }
    out
}

/// Action of `W±` on a basis of `Λ±` plus the Gram matrix of that basis.
#[derive(Clone, Debug)]
pub struct WeylEndo {
    /// Column `i` holds the coordinates of `W b_i`.
    pub n: QMat,
    pub gram: QMat,
    /// Basis 2-forms as coefficient 6-vectors.
    pub basis: Vec<QVec>,
}

impl WeylEndo {
    pub fn from_parts(n: QMat, gram: QMat) -> Self {
        WeylEndo { n, gram, basis: Vec::new() }
    }

    pub fn is_self_adjoint(&self) -> bool {
        let gn = linalg::mat_mul(&self.gram, &self.n);
        (0..3).all(|i| (0..3).all(|j| gn[i][j] == gn[j][i]))
    }

    pub fn trace(&self) -> Q {
        (0..3).fold(Q::zero(), |acc, i| acc + &self.n[i][i])
    }

    /// Coordinates (in `basis`) to a 6-vector 2-form.
    pub fn to_form(&self, c: &[Q]) -> QVec {
        let mut out = vec![Q::zero(); 6];
        for (ci, b) in c.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(b) {
                *o += ci * x;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PetrovTag {
    Zero,
    TypeII,
    TypeIII,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PetrovVerdict {
    pub tag: PetrovTag,
    pub rank: usize,
    /// Smallest `k ≤ 3` with `N^k = 0`.
    pub nil_index: Option<u8>,
    /// Restriction of the Gram matrix to the image is singular.
    pub image_degenerate: bool,
    /// Restriction of the Gram matrix to the image is zero.
    pub image_null: bool,
    /// Verdict from rank and image degeneracy alone.
    pub rank_route: PetrovTag,
}

impl PetrovVerdict {
    pub fn routes_agree(&self) -> bool {
        self.tag == self.rank_route
    }
}

/// Classify a trace-free self-adjoint endomorphism of a 3-dimensional
/// space with a nondegenerate symmetric form.
pub fn petrov_classify(e: &WeylEndo) -> Result<PetrovVerdict> {
    if !e.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    if !e.trace().is_zero() {
        return Err(Error::NotTraceFree);
    }
    let n = &e.n;
    let n2 = linalg::mat_mul(n, n);
    let n3 = linalg::mat_mul(&n2, n);
    let nil_index = if linalg::is_zero_mat(n) {
        Some(0)
    } else if linalg::is_zero_mat(&n2) {
        Some(2)
    } else if linalg::is_zero_mat(&n3) {
        Some(3)
    } else {
        None
    };
    let rank = linalg::rank(n);
    // image basis: independent columns of N
    let cols: Vec<QVec> = (0..3).map(|j| n.iter().map(|r| r[j].clone()).collect()).collect();
    let mut img: Vec<QVec> = Vec::new();
    for c in cols {
        let mut t = img.clone();
        t.push(c);
        if linalg::rank(&t) == t.len() {
            img = t;
        }
    }
    let restricted: QMat = img.iter().map(|a| img.iter().map(|b| linalg::bilinear(&e.gram, a, b)).collect()).collect();
    let image_null = linalg::is_zero_mat(&restricted);
    let image_degenerate = img.is_empty() || linalg::det(&restricted).is_zero();
    let tag = match nil_index {
        Some(0) => PetrovTag::Zero,
        Some(2) if rank == 1 && image_null => PetrovTag::TypeII,
        Some(3) => PetrovTag::TypeIII,
        _ => PetrovTag::Other,
    };
    let rank_route = match rank {
        0 => PetrovTag::Zero,
        1 if image_null => PetrovTag::TypeII,
        2 if image_degenerate && !image_null => PetrovTag::TypeIII,
        _ => PetrovTag::Other,
    };
    Ok(PetrovVerdict { tag, rank, nil_index: nil_index.map(|k| if k == 0 { 1 } else { k }), image_degenerate, image_null, rank_route })
}

/// Floating-point classification with tolerance `tol` (relative to the
/// largest entry of `N`), using singular values for rank.
pub fn petrov_classify_f64(n: &[[f64; 3]; 3], gram: &[[f64; 3]; 3], tol: f64) -> PetrovTag {
    let m = Matrix3::from_fn(|i, j| n[i][j]);
    let scale = m.amax();
    if scale == 0.0 {
        return PetrovTag::Zero;
    }
    let m = m / scale;
    let m2 = m * m;
    let m3 = m2 * m;
    if m2.amax() < tol {
        let svd = SVD::new(m, true, false);
        let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
        let g = Matrix3::from_fn(|i, j| gram[i][j]);
        let u = svd.u.expect("u requested");
        let v = u.column(0);
        let null = (v.transpose() * g * v)[(0, 0)].abs() < tol * g.amax();
        return if rank == 1 && null { PetrovTag::TypeII } else { PetrovTag::Other };
    }
    if m3.amax() < tol {
        return PetrovTag::TypeIII;
    }
    PetrovTag::Other
}

/// The normal triple of a type III self-dual Weyl tensor at a point:
/// `Wζ = 0, Wη = -ζ, Wθ = η`, `⟨ζ,θ⟩ = 2`, `⟨η,η⟩ = -2`, other pairings zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalTriple {
    pub zeta: QVec,
    pub eta: QVec,
    pub theta: QVec,
}

impl NormalTriple {
    pub fn negated(&self) -> Self {
        let neg = |v: &QVec| v.iter().map(|x| -x.clone()).collect();
        NormalTriple { zeta: neg(&self.zeta), eta: neg(&self.eta), theta: neg(&self.theta) }
    }
}

pub fn normal_triple(e: &WeylEndo) -> Result<NormalTriple> {
    let v = petrov_classify(e)?;
    if v.tag != PetrovTag::TypeIII {
        return Err(Error::NotTypeIII(format!("{:?}", v.tag)));
    }
    let n = &e.n;
    let g = &e.gram;
    let n2 = linalg::mat_mul(n, n);
    let ip = |a: &[Q], b: &[Q]| linalg::bilinear(g, a, b);
    let theta0: QVec = (0..3)
        .map(|i| {
            let mut u = vec![Q::zero(); 3];
            u[i] = Q::one();
            u
        })
        .find(|u| !linalg::is_zero_vec(&linalg::mat_vec(&n2, u)))
        .expect("N^2 nonzero for type III");
    let eta0 = linalg::mat_vec(n, &theta0);
    let zeta: QVec = linalg::mat_vec(n, &eta0).into_iter().map(|x| -x).collect();
    let zt = ip(&zeta, &theta0);
    if zt.is_zero() {
        return Err(Error::NotTypeIII("⟨ζ,θ⟩ vanishes".into()));
    }
    let a = ip(&eta0, &theta0) / (q(2) * &zt);
    let b = -(ip(&theta0, &theta0) + q(2) * &a * ip(&theta0, &eta0) + &a * &a * ip(&eta0, &eta0)) / (q(2) * &zt);
    let theta1: QVec = (0..3).map(|i| &theta0[i] + &a * &eta0[i] + &b * &zeta[i]).collect();
    let eta1: QVec = (0..3).map(|i| &eta0[i] - &a * &zeta[i]).collect();
    let t2 = q(2) / &zt;
    if t2.is_negative() {
        return Err(Error::IrrationalNormalization(format!("⟨ζ,θ⟩ = {zt} is negative")));
    }
    let t = q_sqrt(&t2).ok_or_else(|| Error::IrrationalNormalization(format!("2/⟨ζ,θ⟩ = {t2}")))?;
    let sc = |v: &QVec| -> QVec { e.to_form(&v.iter().map(|x| x * &t).collect::<Vec<_>>()) };
    let triple = NormalTriple { zeta: sc(&zeta), eta: sc(&eta1), theta: sc(&theta1) };
    let first = triple.zeta.iter().find(|x| !x.is_zero()).cloned().unwrap_or_else(Q::zero);
    Ok(if first.is_negative() { triple.negated() } else { triple })
}

/// Canonical frame `(w, w', v, v')` at a point built from a normal triple.
#[derive(Clone, Debug)]
pub struct CanonicalFrame {
    /// Columns are `w, w', v, v'` in coordinates.
    pub frame: QMat,
    /// The triple actually used (possibly sign-flipped so that `η = Id`
    /// on `Ker ζ`).
    pub triple: NormalTriple,
    pub g: QMat,
    pub zeta: QMat,
    pub eta: QMat,
    pub theta: QMat,
}

fn congruence(a: &QMat, e: &QMat) -> QMat {
    linalg::mat_mul(&linalg::transpose(e), &linalg::mat_mul(a, e))
}

pub fn canonical_frame(pa: &PointAlgebra, t: &NormalTriple) -> Result<CanonicalFrame> {
    let mut triple = t.clone();
    let zmat = qform_from_vec(&triple.zeta);
    let ker_z = linalg::nullspace(&zmat);
    if ker_z.len() != 2 {
        return Err(Error::DegenerateFrame(format!("Ker ζ has dimension {}", ker_z.len())));
    }
    // η acts as +1 on Ker ζ; otherwise flip the triple.
    let ce = pa.endomorphism(&triple.eta);
    let image = linalg::mat_vec(&ce, &ker_z[0]);
    if image == ker_z[0] {
    } else if image.iter().zip(&ker_z[0]).all(|(a, b)| a == &-b.clone()) {
        triple = triple.negated();
    } else {
        return Err(Error::DegenerateFrame("η is not ±Id on Ker ζ".into()));
    }
    let th = qform_from_vec(&triple.theta);
    let ker_t = linalg::nullspace(&th);
    if ker_t.len() != 2 {
        return Err(Error::DegenerateFrame(format!("Ker θ has dimension {}", ker_t.len())));
    }
    let zmat = qform_from_vec(&triple.zeta);
    let cz = pa.endomorphism(&triple.zeta);
    // Deterministic candidates: the two kernel vectors, then their sum.
    let (h1, h2) = (ker_t[0].clone(), ker_t[1].clone());
    let s = linalg::bilinear(&zmat, &h1, &h2);
    if s.is_zero() {
        return Err(Error::DegenerateFrame("ζ(w, w') = 0 on Ker θ".into()));
    }
    let w: QVec = h1.iter().map(|x| x / &s).collect();
    let w2 = h2;
    let v: QVec = linalg::mat_vec(&cz, &w2).into_iter().map(|x| -x).collect();
    let v2 = linalg::mat_vec(&cz, &w);
    let frame: QMat = (0..4).map(|i| vec![w[i].clone(), w2[i].clone(), v[i].clone(), v2[i].clone()]).collect();
    if linalg::det(&frame).is_zero() {
        return Err(Error::DegenerateFrame("frame vectors are dependent".into()));
    }
    Ok(CanonicalFrame {
        g: congruence(&pa.g, &frame),
        zeta: congruence(&zmat, &frame),
        eta: congruence(&qform_from_vec(&triple.eta), &frame),
        theta: congruence(&th, &frame),
        frame,
        triple,
    })
}

/// The component table every canonical frame must reproduce:
/// indices `0=w, 1=w', 2=v, 3=v'`.
pub fn expected_frame_table() -> (QMat, QMat, QMat, QMat) {
    let mut g = linalg::zeros(4, 4);
    g[2][0] = Q::one();
    g[0][2] = Q::one();
    g[3][1] = Q::one();
    g[1][3] = Q::one();
    let mut z = linalg::zeros(4, 4);
    z[0][1] = Q::one();
    z[1][0] = -Q::one();
    let mut e = linalg::zeros(4, 4);
    e[2][0] = Q::one();
    e[0][2] = -Q::one();
    e[3][1] = Q::one();
    e[1][3] = -Q::one();
    let mut t = linalg::zeros(4, 4);
    t[2][3] = q(2);
    t[3][2] = q(-2);
    (g, z, e, t)
}

/// Components of a covariant 4-tensor in a frame (columns of `e`).
pub fn frame_components(r: &Tensor4<Q>, e: &QMat) -> Tensor4<Q> {
    // contract one index at a time
    let step = |t: &Tensor4<Q>, slot: usize| -> Tensor4<Q> {
        Tensor4::from_fn(|a, b, c, d| {
            let ix = [a, b, c, d];
            let mut acc = Q::zero();
            for k in 0..N {
                let coef = &e[k][ix[slot]];
                if coef.is_zero() {
                    continue;
                }
                let mut jx = ix;
                jx[slot] = k;
                acc += coef * t.get(jx[0], jx[1], jx[2], jx[3]);
            }
            acc
        })
    };
    let mut t = r.clone();
    for slot in 0..4 {
        t = step(&t, slot);
    }
    t
}

/// Float copy of a 3x3 exact matrix.
pub fn to_f64_3(m: &QMat) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| q_to_f64(&m[i][j])))
}
