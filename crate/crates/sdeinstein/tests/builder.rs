mod common;

use common::*;
use sdeinstein::builder::*;
use sdeinstein::exactfield::{q, qr, Poly, PointSampler, RatFn, Q};
use sdeinstein::pdesolve::residual_eqn;
use sdeinstein::tensorcalc::{curvature, det4, metric_inverse, N};

fn rf(p: Poly) -> RatFn {
    RatFn::from(p)
}

fn x1() -> RatFn {
    RatFn::var(2)
}

fn x2() -> RatFn {
    RatFn::var(3)
}

#[test]
fn lccne_derived_scalars_by_hand() {
    let sol = lccne_k(1);
    let ds = derived_scalars(&sol).unwrap();
    assert!(ds.s.is_zero());
    assert!(ds.r.is_zero());
    let one_minus_y1 = rf(&c(1) - &y1());
    assert_eq!(ds.f, (&(&x1() * &one_minus_y1) * &x2()).scale(&qr(1, 4)));
    assert_eq!(ds.e, &one_minus_y1 + &x2().pow(2).scale(&qr(1, 2)));
    assert!(ds.l.is_zero());
    assert_eq!(ds.q, &x1().pow(2) * &one_minus_y1);
}

#[test]
fn zero_data_is_not_a_solution() {
    let sol = SolutionData::zero(q(1));
    assert!(matches!(derived_scalars(&sol), Err(sdeinstein::Error::EqnResidualNonzero(_))));
    let (_, second) = residual_eqn(&sol);
    assert_eq!(second, RatFn::one());
}

#[test]
fn general_family_solves_the_system() {
    let (a, b) = residual_eqn(&general_family());
    assert!(a.is_zero(), "first residual {a}");
    assert!(b.is_zero(), "second residual {b}");
}

#[test]
fn lccne_blocks_at_unit_point() {
    let m = assemble_metric(&lccne_k(1)).unwrap();
    let g = m.eval(&[q(0), q(0), q(1), q(1)]).unwrap();
    assert_eq!(g[0][0], q(-2));
    assert_eq!(g[0][1], q(0));
    assert_eq!(g[1][1], q(3));
    // rows: horizontal index, columns: (c, a)
    assert_eq!([g[0][2].clone(), g[0][3].clone()], [q(1), q(-1)]);
    assert_eq!([g[1][2].clone(), g[1][3].clone()], [q(0), q(-1)]);
    for i in 2..4 {
        for j in 2..4 {
            assert_eq!(g[i][j], q(0));
        }
    }
}

#[test]
fn horizontal_block_closed_form() {
    let sol = general_family();
    let m = assemble_metric(&sol).unwrap();
    let (x, cv, qv) = (radial(), vc(), sol.q_vec());
    let k = RatFn::constant(sol.k.clone());
    let g11 = &sol.lambda(&x, &x).scale(&q(-2)) - &omega(&x, &qv).scale(&q(4));
    let g12 = &omega(&qv, &cv).scale(&q(2)) - &sol.mu(&x, &x).scale(&q(2));
    let g22 = &(&sol.lambda(&cv, &cv).scale(&q(2)) - &sol.mu(&cv, &x).scale(&q(4))) + &(&k * &x2().pow(2));
    assert_eq!(m.g[0][0], g11);
    assert_eq!(m.g[0][1], g12);
    assert_eq!(m.g[1][0], g12);
    assert_eq!(m.g[1][1], g22);
    assert!(m.is_symmetric());
}

#[test]
fn determinant_is_square_of_pairing_block() {
    for sol in [lccne_k(1), general_family()] {
        let m = assemble_metric(&sol).unwrap();
        // block form [[H, C^T], [C, 0]] has det = det(C)^2 and det C = -x2
        assert_eq!(det4(&m.g), x2().pow(2));
    }
}

#[test]
fn metric_ignores_r() {
    for sol in [lccne_k(1), general_family()] {
        let base = assemble_metric(&sol).unwrap();
        let ds = derived_scalars(&sol).unwrap();
        assert!(ds.r.is_polynomial());
        let shifted = sol.with_r_override(ds.r.numer() + &Poly::int(7));
        let other = assemble_metric(&shifted).unwrap();
        assert_eq!(base.g, other.g);
        let r_plus = &ds.r + &RatFn::int(7);
        assert_eq!(derived_scalars(&shifted).unwrap().r, r_plus);
    }
}

fn base_vec(xi: Q, tau: Q) -> [Q; 2] {
    [xi, tau]
}

fn eval_at(f: &RatFn, p: &[Q; 4]) -> Q {
    f.eval(p).unwrap()
}

#[test]
fn h_pairings_match_closed_table() {
    let sol = general_family();
    let ds = derived_scalars(&sol).unwrap();
    let (x, cv, qv) = (radial(), vc(), sol.q_vec());
    let k = RatFn::constant(sol.k.clone());
    let ph = phi();
    let mut sampler = PointSampler::new(11);
    let lcc = rf(sol.lambda_cc.clone());
    let pairs = [
        (base_vec(q(1), q(0)), base_vec(q(0), q(1))),
        (base_vec(q(2), qr(-1, 3)), base_vec(qr(1, 2), q(5))),
        (base_vec(q(-1), q(1)), base_vec(q(1), q(1))),
    ];
    for (w, w2) in pairs.iter() {
        let parts = f_parts(&sol, &ds, w).unwrap();
        let (xi, tau) = (RatFn::constant(w[0].clone()), RatFn::constant(w[1].clone()));
        let (xi2, tau2) = (RatFn::constant(w2[0].clone()), RatFn::constant(w2[1].clone()));
        let sym = &(&xi * &tau2) + &(&xi2 * &tau);
        let hk = (&(&(&k * &ph.pow(2)) * &tau) * &tau2).scale(&qr(-1, 2));
        let hq = &(&omega(&x, &qv).scale(&q(2)) * &(&xi * &xi2)) - &(&omega(&qv, &cv) * &sym);
        let hl = &(&sol.lambda(&x, &x) * &(&xi * &xi2)) - &(&lcc * &(&tau * &tau2));
        let hm = &(&sol.mu(&x, &x) * &sym) + &(&sol.mu(&cv, &x).scale(&q(2)) * &(&tau * &tau2));
        let got = [
            h_pair(&parts.k, w2),
            h_pair(&parts.q, w2),
            h_pair(&parts.lambda, w2),
            h_pair(&parts.mu, w2),
        ];
        let want = [hk, hq, hl, hm];
        for p in sampler.points(5) {
            for (g, e) in got.iter().zip(want.iter()) {
                assert_eq!(eval_at(g, &p), eval_at(e, &p));
            }
        }
        // the trace-free part is h-symmetric, the fζ part h-antisymmetric
        let parts2 = f_parts(&sol, &ds, w2).unwrap();
        let a = &h_pair(&parts.without_fzeta(), w2) - &h_pair(&parts2.without_fzeta(), w);
        assert!(a.is_zero());
        let b = &h_pair(&parts.fzeta, w2) + &h_pair(&parts2.fzeta, w);
        assert!(b.is_zero());
    }
}

#[test]
fn compact_form_of_deformation() {
    for sol in [lccne_k(1), general_family()] {
        let ds = derived_scalars(&sol).unwrap();
        let (x, cv) = (radial(), vc());
        for w in [base_vec(q(1), q(0)), base_vec(q(0), q(1)), base_vec(q(3), qr(-2, 7))] {
            let (xi, tau) = (RatFn::constant(w[0].clone()), RatFn::constant(w[1].clone()));
            let full = f_operator(&sol, &ds, &w).unwrap();
            let cx = &(&ds.e * &tau) - &(&ds.l_plus * &xi);
            let cc = &(&ds.l_minus * &tau) + &(&ds.q * &xi);
            for i in 0..2 {
                let want = &(&cx * &x[i]) + &(&cc * &cv[i]);
                assert_eq!(&phi() * &full[i], want);
            }
        }
    }
}

#[test]
fn compact_form_without_fzeta() {
    // φ²·(F − fζ)w̄ = E X + L c with w̄ = φ⁻¹∂₂
    for sol in [lccne_k(1), general_family()] {
        let ds = derived_scalars(&sol).unwrap();
        let parts = f_parts(&sol, &ds, &base_vec(q(0), q(1))).unwrap();
        let tf = parts.without_fzeta();
        let (x, cv) = (radial(), vc());
        for i in 0..2 {
            let want = &(&ds.e * &x[i]) + &(&ds.l * &cv[i]);
            assert_eq!(&phi() * &tf[i], want);
        }
    }
}

#[test]
fn fk_on_wbar_is_half_k_x() {
    let sol = general_family();
    let ds = derived_scalars(&sol).unwrap();
    let parts = f_parts(&sol, &ds, &base_vec(q(0), q(1))).unwrap();
    let phinv = phi().inv().unwrap();
    let x = radial();
    for i in 0..2 {
        assert_eq!(&phinv * &parts.k[i], x[i].scale(&qr(1, 2)));
    }
}

#[test]
fn derived_l_pm_identities() {
    let sol = general_family();
    let ds = derived_scalars(&sol).unwrap();
    let (x, cv) = (radial(), vc());
    let ocq = rf(sol.omega_cq.clone());
    let r_phi2 = (&ds.r * &phi().pow(2)).scale(&q(4));
    let lp2 = &(&(&sol.mu(&x, &x) + &sol.lambda(&cv, &x)) + &ocq.scale(&q(3))) + &r_phi2;
    let lm2 = &(&(&sol.mu(&x, &x).scale(&q(3)) - &sol.lambda(&cv, &x)) + &ocq) - &r_phi2;
    assert_eq!(ds.l_plus.scale(&q(2)), lp2);
    assert_eq!(ds.l_minus.scale(&q(2)), lm2);
}

fn vec4_pair(g: &sdeinstein::tensorcalc::Mat4, u: &[RatFn; N], v: &[RatFn; N]) -> RatFn {
    pair(g, u, v)
}

#[test]
fn deformed_frame_is_null() {
    for sol in [lccne_k(1), general_family()] {
        let ds = derived_scalars(&sol).unwrap();
        let m = assemble_metric(&sol).unwrap();
        let fr = htilde_frame(&sol, &ds).unwrap();
        for u in [&fr.w1, &fr.w2] {
            for v in [&fr.w1, &fr.w2] {
                assert!(vec4_pair(&m.g, u, v).is_zero());
            }
        }
        assert!(vec4_pair(&m.g, &fr.c, &fr.a).is_zero());
        let oct = octuple_fields(&sol).unwrap();
        let z = vec4_pair(&oct.zeta, &fr.w1, &fr.w2);
        assert_eq!(z, phi().inv().unwrap().scale(&q(2)));
        let fw = f_operator(&sol, &ds, &base_vec(q(1), q(0))).unwrap();
        assert_eq!(fr.w1[2], fw[0]);
        assert_eq!(fr.w1[3], fw[1]);
    }
}

#[test]
fn octuple_identities() {
    let sol = general_family();
    let oct = octuple_fields(&sol).unwrap();
    let m = assemble_metric(&sol).unwrap();
    let unit = |i: usize| -> [RatFn; N] { std::array::from_fn(|k| if k == i { RatFn::one() } else { RatFn::zero() }) };
    for j in 0..2 {
        let zw = vec4_pair(&oct.zeta, &unit(j), &oct.wbar);
        assert_eq!(zw, oct.beta[j].scale(&q(2)));
        // h(ū, ∂_j) = β(∂_j), read off through the metric cross block
        assert_eq!(vec4_pair(&m.g, &oct.ubar, &unit(j)), oct.beta[j]);
    }
    assert_eq!(oct.theta[2][3], -x2().pow(2));
    assert_eq!(oct.beta[0], x2().pow(2).inv().unwrap());
}

fn raise(ginv: &sdeinstein::tensorcalc::Mat4, form: &sdeinstein::tensorcalc::Mat4) -> sdeinstein::tensorcalc::Mat4 {
    // A with form(u, v) = g(Au, v): A^i_j = g^{ik} form_{jk}
    sdeinstein::tensorcalc::mat4(|i, j| sdeinstein::exactfield::sum((0..N).map(|k| &ginv[i][k] * &form[j][k])))
}

fn apply(a: &sdeinstein::tensorcalc::Mat4, v: &[RatFn; N]) -> [RatFn; N] {
    std::array::from_fn(|i| sdeinstein::exactfield::sum((0..N).map(|j| &a[i][j] * &v[j])))
}

#[test]
fn eta_is_the_product_structure() {
    for sol in [lccne_k(1), general_family()] {
        let ds = derived_scalars(&sol).unwrap();
        let m = assemble_metric(&sol).unwrap();
        let ginv = metric_inverse(&m).unwrap();
        let oct = octuple_fields(&sol).unwrap();
        let a = raise(&ginv, &oct.eta);
        let fr = htilde_frame(&sol, &ds).unwrap();
        for v in [&fr.c, &fr.a] {
            assert_eq!(&apply(&a, v), v);
        }
        for w in [&fr.w1, &fr.w2] {
            let aw = apply(&a, w);
            for i in 0..N {
                assert_eq!(aw[i], -&w[i]);
            }
        }
        for i in 0..N {
            assert!(oct.theta[i].iter().zip(0..N).all(|(t, j)| *t == -&oct.theta[j][i]));
        }
        assert!(vec4_pair(&oct.theta, &fr.w1, &fr.c).is_zero());
        assert!(vec4_pair(&oct.theta, &fr.w2, &fr.a).is_zero());
    }
}

#[test]
fn eta_sees_r_but_metric_does_not() {
    let sol = lccne_k(1);
    let ds = derived_scalars(&sol).unwrap();
    let shifted = sol.with_r_override(ds.r.numer() + &Poly::int(1));
    let e1 = octuple_fields(&sol).unwrap().eta;
    let e2 = octuple_fields(&shifted).unwrap().eta;
    assert_ne!(e1, e2);
}

#[test]
fn invariant_values() {
    let sol = lccne_k(1);
    let inv = invariant_gamma_u(&sol);
    assert_eq!(inv.eval(&[q(0), q(0), q(1), q(1)]).unwrap(), q(2));
    assert_eq!(inv.eval(&[q(0), q(0), q(1), q(2)]).unwrap(), qr(5, 4));
    let flat = SolutionData::zero(q(3));
    assert_eq!(invariant_gamma_u(&flat), RatFn::int(3));
}

#[test]
fn gamma_from_christoffels_matches_closed_forms() {
    for sol in [lccne_k(1), general_family()] {
        let ds = derived_scalars(&sol).unwrap();
        let m = assemble_metric(&sol).unwrap();
        let cs = curvature(&m).unwrap();
        let fr = htilde_frame(&sol, &ds).unwrap();
        let oct = octuple_fields(&sol).unwrap();
        let g_u = gamma_via_connection(&m, &cs.christoffel, &fr, &oct.zeta, &oct.ubar).unwrap();
        assert_eq!(g_u.scale(&q(4)), invariant_gamma_u(&sol));
        for v in [vc(), va()] {
            let v4 = [RatFn::zero(), RatFn::zero(), v[0].clone(), v[1].clone()];
            let g_v = gamma_via_connection(&m, &cs.christoffel, &fr, &oct.zeta, &v4).unwrap();
            assert_eq!(g_v, gamma_closed_form(&sol, &ds, &v).unwrap());
        }
    }
}

#[test]
fn reference_metric_has_no_connection_form() {
    let m = reference_metric();
    let cs = curvature(&m).unwrap();
    assert!(cs.riemann.is_zero());
    let frame = FrameField {
        w1: [RatFn::one(), RatFn::zero(), RatFn::zero(), RatFn::zero()],
        w2: [RatFn::zero(), RatFn::one(), RatFn::zero(), RatFn::zero()],
        c: [RatFn::zero(), RatFn::zero(), RatFn::one(), RatFn::zero()],
        a: [RatFn::zero(), RatFn::zero(), RatFn::zero(), RatFn::one()],
    };
    let oct = octuple_fields(&lccne_k(1)).unwrap();
    for i in 0..N {
        let v: [RatFn; N] = std::array::from_fn(|k| if k == i { RatFn::one() } else { RatFn::zero() });
        assert!(gamma_via_connection(&m, &cs.christoffel, &frame, &oct.zeta, &v).unwrap().is_zero());
    }
}

#[test]
fn solution_json_roundtrip() {
    let sol = general_family().with_r_override(Poly::int(2));
    let s = serde_json::to_string(&sol).unwrap();
    let back: SolutionData = serde_json::from_str(&s).unwrap();
    assert_eq!(back, sol);
    let bad = r#"{"K":"1","components":{"lambda_cc":[{"e":[0,0,1],"c":1}],"lambda_ca":[],"lambda_aa":[],"mu_cc":[],"mu_ca":[],"mu_aa":[],"omega_cq":[],"omega_aq":[]}}"#;
    assert!(serde_json::from_str::<SolutionData>(bad).is_err());
}
