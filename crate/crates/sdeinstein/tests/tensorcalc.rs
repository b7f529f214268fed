mod common;

use common::*;
use proptest::prelude::*;
use sdeinstein::builder::{assemble_metric, reference_metric};
use sdeinstein::exactfield::linalg;
use sdeinstein::exactfield::{point_to_f64, q, qr, Mono, Poly, PointSampler, RatFn, Q};
use sdeinstein::tensorcalc::*;
use sdeinstein::Error;

fn diag(d: [i64; 4]) -> ChartMetric {
    ChartMetric::new(mat4(|i, j| if i == j { RatFn::int(d[i]) } else { RatFn::zero() }), 1)
}

fn lccne_metric(k: i64) -> ChartMetric {
    assemble_metric(&lccne_k(k)).unwrap()
}

fn is_identity(m: &Mat4) -> bool {
    (0..N).all(|i| (0..N).all(|j| m[i][j] == if i == j { RatFn::one() } else { RatFn::zero() }))
}

fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    mat4(|i, j| sdeinstein::exactfield::sum((0..N).map(|k| &a[i][k] * &b[k][j])))
}

#[test]
fn constant_diagonal_inverse_and_gg() {
    let m = diag([-1, -1, 1, 1]);
    let inv = metric_inverse(&m).unwrap();
    assert_eq!(inv, m.g);
    assert!(curvature(&m).unwrap().riemann.is_zero());
    assert_eq!(*kulkarni_gg(&m).get(0, 1, 0, 1), RatFn::one());
}

#[test]
fn singular_metric_is_rejected() {
    let m = diag([1, 1, 1, 0]);
    assert!(matches!(metric_inverse(&m), Err(Error::SingularMetric)));
}

#[test]
fn constructed_determinant_and_inverse() {
    let m = lccne_metric(1);
    assert_eq!(det4(&m.g), RatFn::var(3).pow(2));
    let inv = metric_inverse(&m).unwrap();
    assert!(is_identity(&mul(&m.g, &inv)));
}

#[test]
fn reference_inverse_has_only_x2_denominators() {
    let m = reference_metric();
    let inv = metric_inverse(&m).unwrap();
    for row in &inv {
        for e in row {
            let d = e.denom();
            assert!(d.as_monomial().map(|(mm, _)| (0..3).all(|v| mm.0[v] == 0)).unwrap_or(false), "{e}");
        }
    }
    // oracle: solve g X = I at sample points
    for p in PointSampler::new(4).points(5) {
        let gp = m.eval(&p).unwrap();
        for j in 0..N {
            let e: Vec<Q> = (0..N).map(|i| if i == j { q(1) } else { q(0) }).collect();
            let col = linalg::solve(&gp, &e).unwrap();
            for i in 0..N {
                assert_eq!(inv[i][j].eval(&p).unwrap(), col[i]);
            }
        }
    }
}

#[test]
fn reference_metric_is_flat_with_nonzero_christoffels() {
    let m = reference_metric();
    let c = curvature(&m).unwrap();
    assert!(c.christoffel.iter().flatten().flatten().any(|x| !x.is_zero()));
    assert!(c.riemann.is_zero());
    assert!(c.ricci.iter().flatten().all(RatFn::is_zero));
    assert!(c.scalar.is_zero());
}

#[test]
fn levi_civita_properties_on_lccne() {
    let m = lccne_metric(1);
    let c = curvature(&m).unwrap();
    assert!(metric_compatibility(&m, &c.christoffel).iter().all(RatFn::is_zero));
    for a in 0..N {
        for b in 0..N {
            for d in 0..N {
                assert_eq!(c.christoffel[a][b][d], c.christoffel[a][d][b]);
            }
        }
    }
    assert!(first_bianchi(&c.riemann).iter().all(RatFn::is_zero));
    let r = &c.riemann;
    for j in 0..N {
        for k in 0..N {
            for l in 0..N {
                for p in 0..N {
                    assert!((r.get(j, k, l, p) + r.get(k, j, l, p)).is_zero());
                    assert!((r.get(j, k, l, p) + r.get(j, k, p, l)).is_zero());
                    assert_eq!(r.get(j, k, l, p), r.get(l, p, j, k));
                }
            }
        }
    }
}

#[test]
fn einstein_for_three_values_of_k() {
    for k in [1, 0, -2] {
        let m = lccne_metric(k);
        let c = curvature(&m).unwrap();
        assert!(einstein_residual(&m, &c, &q(k)).is_empty(), "K = {k}");
        assert_eq!(c.scalar, RatFn::int(12 * k));
    }
}

#[test]
fn weyl_is_trace_free_and_matches_general_decomposition() {
    let m = assemble_metric(&general_family()).unwrap();
    let c = curvature(&m).unwrap();
    let w = weyl(&m, &c, &q(1)).unwrap();
    assert_eq!(w, weyl_general(&m, &c));
    for k in 0..N {
        for p in 0..N {
            let tr = sdeinstein::exactfield::sum(
                (0..N).flat_map(|j| (0..N).map(move |l| (j, l))).map(|(j, l)| &c.ginv[j][l] * w.get(j, k, l, p)),
            );
            assert!(tr.is_zero());
        }
    }
}

#[test]
fn perturbed_metric_is_not_einstein() {
    let m = lccne_metric(1);
    let mut g = m.g.clone();
    g[0][0] = &g[0][0] + &RatFn::var(0);
    let bad = ChartMetric::new(g, 1);
    let c = curvature(&bad).unwrap();
    assert!(!einstein_residual(&bad, &c, &q(1)).is_empty());
    assert!(matches!(weyl(&bad, &c, &q(1)), Err(Error::NotEinstein(_))));
}

#[test]
fn flat_weyl_vanishes() {
    let m = reference_metric();
    let c = curvature(&m).unwrap();
    assert!(weyl(&m, &c, &q(0)).unwrap().is_zero());
}

#[test]
fn weyl_scales_with_constant_factor() {
    let m = lccne_metric(1);
    let c = curvature(&m).unwrap();
    let w = weyl_general(&m, &c);
    let m4 = m.scaled(&q(4));
    let c4 = curvature(&m4).unwrap();
    assert_eq!(weyl_general(&m4, &c4), w.scale(&q(4)));
    // Einstein constant rescales as K/4
    assert!(einstein_residual(&m4, &c4, &qr(1, 4)).is_empty());
}

#[test]
fn finite_difference_riemann_agrees() {
    let m = lccne_metric(1);
    let c = curvature(&m).unwrap();
    let g = numeric_metric(&m);
    let mut pts = vec![[0.0, 0.0, 1.0, 1.0]];
    pts.extend(PointSampler::new(10).points(4).iter().map(point_to_f64));
    for p in pts {
        let num = numeric_riemann(&g, &p, 1e-3).unwrap();
        let ex = c.riemann.eval_f64(&p);
        let scale = ex.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let err = num.iter().zip(ex.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err / scale <= 1e-6, "{err} at {p:?}");
    }
}

#[test]
fn second_bianchi_sampled() {
    let m = assemble_metric(&general_family()).unwrap();
    let c = curvature(&m).unwrap();
    for p in PointSampler::new(11).points(5) {
        assert!(second_bianchi_residual(&c, &point_to_f64(&p)) <= 1e-8);
    }
}

#[test]
fn gg_has_curvature_symmetries() {
    let m = lccne_metric(1);
    let gg = kulkarni_gg(&m);
    assert!(first_bianchi(&gg).iter().all(RatFn::is_zero));
    for j in 0..N {
        for k in 0..N {
            for l in 0..N {
                for p in 0..N {
                    assert!((gg.get(j, k, l, p) + gg.get(k, j, l, p)).is_zero());
                    assert_eq!(gg.get(j, k, l, p), gg.get(l, p, j, k));
                }
            }
        }
    }
}

#[test]
fn metric_json_roundtrip() {
    let m = lccne_metric(-2);
    let s = serde_json::to_string(&m).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["coords"], serde_json::json!(["y1", "y2", "x1", "x2"]));
    let back: ChartMetric = serde_json::from_str(&s).unwrap();
    assert_eq!(back, m);
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::array::uniform4(0u16..2), -3i64..=3), 0..3).prop_map(|ts| {
        let mut p = Poly::zero();
        for (e, c) in ts {
            p.add_term(Mono(e), q(c));
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Deformations of the horizontal block keep `det g = (x2)²`; the
    /// Levi-Civita identities must hold for all of them.
    #[test]
    fn identities_on_deformed_reference(a in arb_poly(), b in arb_poly(), d in arb_poly()) {
        let mut m = reference_metric();
        m.g[0][0] = &m.g[0][0] + &RatFn::from(a);
        m.g[0][1] = &m.g[0][1] + &RatFn::from(b.clone());
        m.g[1][0] = &m.g[1][0] + &RatFn::from(b);
        m.g[1][1] = &m.g[1][1] + &RatFn::from(d);
        let c = curvature(&m).unwrap();
        prop_assert!(metric_compatibility(&m, &c.christoffel).iter().all(RatFn::is_zero));
        prop_assert!(first_bianchi(&c.riemann).iter().all(RatFn::is_zero));
        let p = [0.25, -0.5, 0.75, 1.25];
        let num = numeric_riemann(&numeric_metric(&m), &p, 1e-3).unwrap();
        let ex = c.riemann.eval_f64(&p);
        let scale = ex.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let err = num.iter().zip(ex.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err / scale <= 1e-6);
    }
}
