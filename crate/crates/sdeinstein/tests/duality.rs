mod common;

use common::*;
use proptest::prelude::*;
use sdeinstein::builder::{assemble_metric, octuple_fields, reference_metric};
use sdeinstein::duality::*;
use sdeinstein::exactfield::linalg::{self, QMat, QVec};
use sdeinstein::exactfield::{q, PointSampler, RatFn, Q};
use sdeinstein::tensorcalc::*;
use sdeinstein::Error;

struct Setup {
    m: ChartMetric,
    c: CurvatureSet,
    h: HodgeOperator,
    split: WeylSplit,
}

/// lccne K = 1 with the orientation making `W⁻` vanish.
fn lccne_setup() -> Setup {
    let m = assemble_metric(&lccne_k(1)).unwrap();
    let c = curvature(&m).unwrap();
    let w = weyl(&m, &c, &q(1)).unwrap();
    for o in [1, -1] {
        let mo = m.with_orientation(o);
        let h = hodge_star(&mo, &c.ginv).unwrap();
        let split = weyl_plus_minus(&w, &c.ginv, &h);
        if split.minus_vanishes() {
            return Setup { m: mo, c, h, split };
        }
    }
    panic!("no self-dual orientation");
}

fn algebra(s: &Setup, p: &[Q; 4]) -> PointAlgebra {
    PointAlgebra::new(&s.m, &s.c.ginv, &s.h, &s.split.full, p).unwrap()
}

fn unit_point() -> [Q; 4] {
    [q(0), q(0), q(1), q(1)]
}

fn mat6_eq_identity(m: &[[RatFn; 6]; 6], sign: i64) -> bool {
    (0..6).all(|i| (0..6).all(|j| m[i][j] == if i == j { RatFn::int(sign) } else { RatFn::zero() }))
}

#[test]
fn star_is_an_involution_with_volume_x2() {
    let s = lccne_setup();
    assert!(s.h.squares_to_identity());
    assert_eq!(s.h.volume_density, RatFn::var(3));
    assert_eq!(&s.h.volume_density * &s.h.volume_density, det4(&s.m.g));
}

#[test]
fn orientation_flip_negates_star() {
    let s = lccne_setup();
    let h2 = hodge_star(&s.m.with_orientation(-s.m.orientation), &s.c.ginv).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            assert_eq!(h2.matrix[i][j], -&s.h.matrix[i][j]);
        }
    }
    assert_eq!(h2.projector(1), s.h.projector(-1));
}

#[test]
fn projectors_are_complementary_and_orthogonal() {
    let s = lccne_setup();
    let gram = gram6(&s.c.ginv);
    let (pp, pm) = (s.h.projector(1), s.h.projector(-1));
    let sum: [[RatFn; 6]; 6] = std::array::from_fn(|i| std::array::from_fn(|j| &pp[i][j] + &pm[i][j]));
    assert!(mat6_eq_identity(&sum, 1));
    // ⟨P⁺ω, P⁻ω′⟩ = (P⁺)ᵀ G P⁻
    for a in 0..6 {
        for b in 0..6 {
            let x = sdeinstein::exactfield::sum(
                (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| &(&pp[i][a] * &gram[i][j]) * &pm[j][b]),
            );
            assert!(x.is_zero());
        }
    }
}

#[test]
fn weyl_parts_trace_free_and_self_dual() {
    let s = lccne_setup();
    assert!(WeylSplit::trace(&s.split.plus).is_zero());
    assert!(WeylSplit::trace(&s.split.minus).is_zero());
    assert!(s.split.minus_vanishes());
    assert!(!s.split.plus_vanishes());
    // the opposite orientation sees the same operator as anti-self-dual
    let h2 = hodge_star(&s.m.with_orientation(-s.m.orientation), &s.c.ginv).unwrap();
    let w = weyl(&s.m, &s.c, &q(1)).unwrap();
    let other = weyl_plus_minus(&w, &s.c.ginv, &h2);
    assert!(other.plus_vanishes() && !other.minus_vanishes());
}

#[test]
fn flat_metric_has_no_weyl_parts() {
    let m = reference_metric();
    let c = curvature(&m).unwrap();
    let h = hodge_star(&m, &c.ginv).unwrap();
    let split = weyl_plus_minus(&weyl(&m, &c, &q(0)).unwrap(), &c.ginv, &h);
    assert!(split.plus_vanishes() && split.minus_vanishes());
}

#[test]
fn non_square_determinant_is_rejected() {
    let g = mat4(|i, j| if i == j { RatFn::int([1, 1, 1, 2][i]) } else { RatFn::zero() });
    let m = ChartMetric::new(g, 1);
    let ginv = metric_inverse(&m).unwrap();
    assert!(matches!(hodge_star(&m, &ginv), Err(Error::NonRationalVolumeDensity(_))));
}

#[test]
fn inner_product_on_diagonal_metric() {
    let g = mat4(|i, j| if i == j { RatFn::int([-1, -1, 1, 1][i]) } else { RatFn::zero() });
    let m = ChartMetric::new(g, 1);
    let ginv = metric_inverse(&m).unwrap();
    let e = |i: usize| -> [RatFn; 4] { std::array::from_fn(|k| if k == i { RatFn::one() } else { RatFn::zero() }) };
    let dy = wedge(&e(0), &e(1));
    let dx = wedge(&e(2), &e(3));
    assert_eq!(twoform_inner(&ginv, &dy, &dy), &ginv[0][0] * &ginv[1][1]);
    assert!(twoform_inner(&ginv, &dy, &dx).is_zero());
}

#[test]
fn inner_product_against_wedge_of_lowered_vectors() {
    // ⟨ζ, g(u,·)∧g(v,·)⟩ = ζ(u, v)
    let sol = general_family();
    let m = assemble_metric(&sol).unwrap();
    let ginv = metric_inverse(&m).unwrap();
    let z = octuple_fields(&sol).unwrap().zeta;
    for (u, v) in [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)] {
        let lu: [RatFn; 4] = std::array::from_fn(|i| m.g[u][i].clone());
        let lv: [RatFn; 4] = std::array::from_fn(|i| m.g[v][i].clone());
        let lhs = twoform_inner(&ginv, &z, &wedge(&lu, &lv));
        assert_eq!(lhs, z[u][v]);
        for p in PointSampler::new(2).points(5) {
            assert_eq!(lhs.eval(&p).unwrap(), z[u][v].eval(&p).unwrap());
        }
    }
}

fn wze_gram() -> QMat {
    vec![vec![q(0), q(0), q(2)], vec![q(0), q(-2), q(0)], vec![q(2), q(0), q(0)]]
}

#[test]
fn classifier_on_hand_built_endomorphisms() {
    let z = linalg::zeros(3, 3);
    let v = petrov_classify(&WeylEndo::from_parts(z, wze_gram())).unwrap();
    assert_eq!(v.tag, PetrovTag::Zero);
    // ζ ↦ 0, η ↦ -ζ, θ ↦ η
    let mut n = linalg::zeros(3, 3);
    n[0][1] = q(-1);
    n[1][2] = q(1);
    let e = WeylEndo::from_parts(n.clone(), wze_gram());
    assert!(e.is_self_adjoint());
    let v = petrov_classify(&e).unwrap();
    assert_eq!((v.tag, v.rank_route, v.nil_index, v.rank), (PetrovTag::TypeIII, PetrovTag::TypeIII, Some(3), 2));
    assert!(v.image_degenerate && !v.image_null);
    // oracle: explicit powers
    let n2 = linalg::mat_mul(&n, &n);
    assert!(!linalg::is_zero_mat(&n2) && linalg::is_zero_mat(&linalg::mat_mul(&n2, &n)));
    // θ ↦ ζ: rank 1 with null image
    let mut n = linalg::zeros(3, 3);
    n[0][2] = q(1);
    let v = petrov_classify(&WeylEndo::from_parts(n, wze_gram())).unwrap();
    assert_eq!((v.tag, v.rank_route), (PetrovTag::TypeII, PetrovTag::TypeII));
    let id = linalg::identity(3);
    let mut d = linalg::zeros(3, 3);
    d[0][0] = q(1);
    d[1][1] = q(-1);
    assert_eq!(petrov_classify(&WeylEndo::from_parts(d.clone(), id.clone())).unwrap().tag, PetrovTag::Other);
    d[1][1] = q(0);
    assert!(matches!(petrov_classify(&WeylEndo::from_parts(d, id.clone())), Err(Error::NotTraceFree)));
    let mut a = linalg::zeros(3, 3);
    a[0][1] = q(1);
    assert!(matches!(petrov_classify(&WeylEndo::from_parts(a, id)), Err(Error::NotSelfAdjoint)));
}

#[test]
fn lccne_is_type_iii_by_both_routes() {
    let s = lccne_setup();
    let mut pts = vec![unit_point()];
    pts.extend(PointSampler::new(3).points(9));
    for p in pts {
        let pa = algebra(&s, &p);
        let e = pa.weyl_endo(1).unwrap();
        let v = petrov_classify(&e).unwrap();
        assert_eq!(v.tag, PetrovTag::TypeIII);
        assert!(v.routes_agree());
        assert_eq!(petrov_classify(&pa.weyl_endo(-1).unwrap()).unwrap().tag, PetrovTag::Zero);
        // numeric oracle
        assert_eq!(petrov_classify_f64(&to_f64_3(&e.n), &to_f64_3(&e.gram), 1e-9), PetrovTag::TypeIII);
    }
}

fn rank4(v: &QVec) -> usize {
    linalg::rank(&qform_from_vec(v))
}

#[test]
fn normal_triple_relations() {
    let s = lccne_setup();
    for p in PointSampler::new(5).points(5) {
        let pa = algebra(&s, &p);
        let t = normal_triple(&pa.weyl_endo(1).unwrap()).unwrap();
        for tr in [t.clone(), t.negated()] {
            let neg = |v: &QVec| -> QVec { v.iter().map(|x| -x.clone()).collect() };
            assert!(linalg::is_zero_vec(&pa.apply_weyl(&tr.zeta)));
            assert_eq!(pa.apply_weyl(&tr.eta), neg(&tr.zeta));
            assert_eq!(pa.apply_weyl(&tr.theta), tr.eta);
            assert_eq!(pa.inner(&tr.zeta, &tr.theta), q(2));
            assert_eq!(pa.inner(&tr.eta, &tr.eta), q(-2));
            for (a, b) in [(&tr.zeta, &tr.zeta), (&tr.zeta, &tr.eta), (&tr.eta, &tr.theta), (&tr.theta, &tr.theta)] {
                assert_eq!(pa.inner(a, b), q(0));
            }
            assert_eq!((rank4(&tr.zeta), rank4(&tr.theta)), (2, 2));
        }
        let first = t.zeta.iter().find(|x| *x != &q(0)).unwrap();
        assert!(first > &q(0));
    }
}

#[test]
fn recovered_zeta_is_proportional_to_built_zeta() {
    let s = lccne_setup();
    let built = octuple_fields(&lccne_k(1)).unwrap().zeta;
    for p in PointSampler::new(6).points(5) {
        let pa = algebra(&s, &p);
        let t = normal_triple(&pa.weyl_endo(1).unwrap()).unwrap();
        let b: QVec = form_to_vec(&built).iter().map(|x| x.eval(&p).unwrap()).collect();
        assert_eq!(linalg::rank(&vec![b, t.zeta.clone()]), 1);
    }
}

#[test]
fn anticommutator_of_self_dual_forms() {
    let s = lccne_setup();
    let p = unit_point();
    let pa = algebra(&s, &p);
    let t = normal_triple(&pa.weyl_endo(1).unwrap()).unwrap();
    let forms = [&t.zeta, &t.eta, &t.theta];
    for a in forms {
        for b in forms {
            let (ea, eb) = (pa.endomorphism(a), pa.endomorphism(b));
            let ac = linalg::mat_mul(&ea, &eb);
            let ca = linalg::mat_mul(&eb, &ea);
            let ip = pa.inner(a, b);
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { -ip.clone() } else { q(0) };
                    assert_eq!(&ac[i][j] + &ca[i][j], want);
                }
            }
        }
    }
}

#[test]
fn canonical_frame_reproduces_the_table() {
    let s = lccne_setup();
    let (g0, z0, e0, t0) = expected_frame_table();
    let mut first: Option<Tensor4<Q>> = None;
    let mut pts = vec![unit_point()];
    pts.extend(PointSampler::new(8).points(9));
    for p in pts {
        let pa = algebra(&s, &p);
        let t = normal_triple(&pa.weyl_endo(1).unwrap()).unwrap();
        let cf = canonical_frame(&pa, &t).unwrap();
        assert_ne!(linalg::det(&cf.frame), q(0));
        assert_eq!((&cf.g, &cf.zeta, &cf.eta, &cf.theta), (&g0, &z0, &e0, &t0));
        let r = frame_components(&s.c.riemann.eval(&p).unwrap(), &cf.frame);
        match &first {
            None => first = Some(r),
            Some(f) => assert_eq!(&r, f),
        }
    }
}

#[test]
fn canonical_frame_rejects_wrong_triple() {
    let s = lccne_setup();
    let pa = algebra(&s, &unit_point());
    let t = normal_triple(&pa.weyl_endo(1).unwrap()).unwrap();
    let bad = NormalTriple { zeta: t.theta.clone(), eta: t.eta.clone(), theta: vec![q(0); 6] };
    assert!(matches!(canonical_frame(&pa, &bad), Err(Error::DegenerateFrame(_))));
    let z = WeylEndo::from_parts(linalg::zeros(3, 3), wze_gram());
    assert!(matches!(normal_triple(&z), Err(Error::NotTypeIII(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The two classifier routes agree on random trace-free self-adjoint
    /// endomorphisms for the Gram matrix of the normal-triple pattern.
    #[test]
    fn classifier_routes_agree(a in -2i64..3, b in -2i64..3, c in -2i64..3, d in -2i64..3, e in -2i64..3) {
        // G N symmetric ⇔ N = G⁻¹ S for S symmetric; trace fixed by S
        let s_mat: QMat = vec![
            vec![q(a), q(b), q(c)],
            vec![q(b), q(d), q(e)],
            vec![q(c), q(e), q(0)],
        ];
        let g = wze_gram();
        let ginv = {
            let mut m = linalg::zeros(3, 3);
            m[0][2] = Q::new(1.into(), 2.into());
            m[2][0] = Q::new(1.into(), 2.into());
            m[1][1] = Q::new((-1).into(), 2.into());
            m
        };
        let mut n = linalg::mat_mul(&ginv, &s_mat);
        let tr = (0..3).fold(q(0), |acc, i| acc + &n[i][i]);
        let third = tr / q(3);
        for i in 0..3 {
            n[i][i] -= &third;
        }
        let v = petrov_classify(&WeylEndo::from_parts(n.clone(), g.clone())).unwrap();
        if v.tag == PetrovTag::TypeIII || v.rank_route == PetrovTag::TypeIII {
            prop_assert!(v.routes_agree());
        }
        let f = petrov_classify_f64(&to_f64_3(&n), &to_f64_3(&g), 1e-9);
        if v.tag != PetrovTag::Other {
            prop_assert_eq!(f, v.tag);
        }
    }

    #[test]
    fn star_commutes_with_weyl_at_points(seed in 0u64..1000) {
        let s = lccne_setup();
        let p = PointSampler::new(seed).next_point();
        let pa = algebra(&s, &p);
        let ws = linalg::mat_mul(&pa.weyl, &pa.star);
        let sw = linalg::mat_mul(&pa.star, &pa.weyl);
        prop_assert_eq!(ws, sw);
    }
}
