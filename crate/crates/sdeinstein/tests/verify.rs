mod common;

use common::*;
use proptest::prelude::*;
use sdeinstein::builder::{assemble_metric, octuple_fields, reference_metric, SolutionData};
use sdeinstein::exactfield::{point_to_f64, q, qr, Poly, RatFn};
use sdeinstein::pdesolve::{k0_solve, residual_eqn};
use sdeinstein::verify::*;
use sdeinstein::Error;

fn bundle(sol: &SolutionData) -> Bundle {
    Bundle::from_solution(sol).unwrap()
}

fn opts() -> CheckOptions {
    CheckOptions::seeded(42, 10)
}

fn numeric() -> CheckOptions {
    CheckOptions { mode: Mode::Numeric, ..CheckOptions::seeded(42, 5) }
}

#[test]
fn einstein_passes_on_lccne_after_finite_difference_precheck() {
    let b = bundle(&lccne_k(1));
    let fd = verify_einstein(&b, &numeric()).unwrap();
    assert_eq!(fd.status, Status::Pass, "{}", fd.detail);
    let r = verify_einstein(&b, &opts()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.residual_max, ResidualMax::exact_zero());
    assert_eq!(b.curv.scalar, RatFn::int(12));
}

#[test]
fn flat_reference_is_einstein_only_for_zero() {
    let m = reference_metric();
    assert_eq!(verify_einstein(&Bundle::new(m.clone(), q(0)).unwrap(), &opts()).unwrap().status, Status::Pass);
    let r = verify_einstein(&Bundle::new(m, q(1)).unwrap(), &opts()).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.residual_max.value() > 0.0);
}

#[test]
fn perturbed_metric_fails_einstein() {
    let m = assemble_metric(&lccne_k(1)).unwrap();
    let bad = perturbed(&m, 0, 0, &RatFn::var(0));
    let b = Bundle::new(bad, q(1)).unwrap();
    assert_eq!(verify_einstein(&b, &opts()).unwrap().status, Status::Fail);
    assert_eq!(verify_einstein(&b, &numeric()).unwrap().status, Status::Fail);
}

#[test]
fn self_dual_type_iii_on_lccne() {
    for k in [1, 0, -2] {
        let b = bundle(&lccne_k(k));
        let r = verify_selfdual_typeiii(&b, &opts()).unwrap();
        assert_eq!(r.status, Status::Pass, "K = {k}: {}", r.detail);
        assert_eq!(r.points, 10);
        assert!(r.orientation_used.is_some());
    }
}

#[test]
fn orientation_is_exclusive_and_can_be_forced() {
    let b = bundle(&general_family());
    let auto = verify_selfdual(&b, &opts()).unwrap();
    assert_eq!(auto.status, Status::Pass);
    let o = auto.orientation_used.unwrap();
    let forced = CheckOptions { orientation: Some(o), ..opts() };
    assert_eq!(verify_selfdual(&b, &forced).unwrap().status, Status::Pass);
    let wrong = CheckOptions { orientation: Some(-o), ..opts() };
    assert!(matches!(verify_selfdual(&b, &wrong), Err(Error::BothOrientationsFail)));
}

#[test]
fn flat_metric_is_indeterminate_for_type_iii() {
    let b = Bundle::new(reference_metric(), q(0)).unwrap();
    let r = verify_selfdual_typeiii(&b, &opts()).unwrap();
    assert_eq!(r.status, Status::Indeterminate);
    let (_, v) = classify_points(&b, &opts().points[..2], None).unwrap();
    assert!(v.iter().all(|p| p.plus.tag == sdeinstein::duality::PetrovTag::Zero));
}

#[test]
fn numeric_type_iii_agrees() {
    let b = bundle(&general_family());
    let r = verify_selfdual_typeiii(&b, &numeric()).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.detail);
    assert_eq!(r.mode, Mode::Numeric);
}

#[test]
fn curvature_identity_and_its_sensitivity_to_r() {
    let sol = lccne_k(1);
    let b = bundle(&sol);
    // numeric spot check first
    assert_eq!(verify_curvature_identity(&b, &sol, &numeric()).unwrap().status, Status::Pass);
    assert_eq!(verify_curvature_identity(&b, &sol, &opts()).unwrap().status, Status::Pass);
    let r = sdeinstein::builder::derived_scalars(&sol).unwrap().r;
    let bumped = sol.with_r_override(&r.numer().clone() + &Poly::one());
    // the metric does not see r
    assert_eq!(assemble_metric(&bumped).unwrap(), b.metric);
    let res = identity_residual(&b, &bumped).unwrap();
    let bad = res.iter().filter(|x| !x.is_zero()).count();
    assert!(bad > 0);
    let rep = verify_curvature_identity(&b, &bumped, &opts()).unwrap();
    assert_eq!(rep.status, Status::Fail);
    assert!(rep.residual_max.value() > 0.0);
}

#[test]
fn curvature_identity_on_general_family() {
    let sol = general_family();
    let b = bundle(&sol);
    assert_eq!(verify_curvature_identity(&b, &sol, &opts()).unwrap().status, Status::Pass);
}

#[test]
fn curvature_homogeneity_within_and_across_instances() {
    let a = bundle(&lccne_k(1));
    let r = verify_curvature_homogeneity(&a, &opts()).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.detail);
    let other = lccne(q(1), q(3), y1(), &y1() * &y1());
    let b = bundle(&other);
    let (_, ta) = frame_tables(&a, &opts().points, None).unwrap();
    let (_, tb) = frame_tables(&b, &CheckOptions::seeded(7, 3).points, None).unwrap();
    assert!(tb.iter().all(|t| t.same_model(&ta[0])));
    // different K: different model
    let c = bundle(&lccne_k(-2));
    let (_, tc) = frame_tables(&c, &opts().points[..1], None).unwrap();
    assert!(!tc[0].same_model(&ta[0]));
}

#[test]
fn homogeneity_fails_on_a_perturbed_metric() {
    let m = assemble_metric(&lccne_k(1)).unwrap();
    let b = Bundle::new(perturbed(&m, 0, 1, &RatFn::var(2)), q(1)).unwrap();
    let reps = run_suite(&b, &[Check::Homogeneous, Check::Selfdual], &opts()).unwrap();
    assert!(reps.iter().all(|r| r.status == Status::Fail), "{reps:?}");
}

#[test]
fn nonwalker_certificate() {
    for sol in [lccne_k(1), general_family(), lccne_k(5)] {
        let r = verify_nonwalker(&sol, &opts()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!(r.detail.contains("x2 > 0"));
    }
    let beta = octuple_fields(&lccne_k(1)).unwrap().beta;
    for p in &opts().points {
        let x2 = point_to_f64(p)[3];
        assert!((beta[0].eval_f64(&point_to_f64(p)) - x2.powi(-2)).abs() < 1e-12);
    }
    // sensitivity: a 1-form with a zero on Π₊
    let mut bad = beta.clone();
    bad[0] = (&RatFn::var(3) - &RatFn::one()).checked_div(&RatFn::var(3).pow(2)).unwrap();
    let pts = vec![[q(0), q(0), q(1), q(1)]];
    let r = certify_nonvanishing(&bad, &pts);
    assert_eq!(r.status, Status::Fail);
    assert!(r.detail.contains("vanishes at"));
}

#[test]
fn witness_for_the_canonical_instance() {
    let sol = lccne_k(1);
    let b = bundle(&sol);
    let r = nonhomogeneity_witness(&b, &sol, &opts()).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.detail);
    assert_eq!(r.points, 5);
    let w = r.witness.unwrap();
    assert_eq!(w.base, ["0".to_string(), "0".to_string()]);
    assert_eq!(w.fibre, [["1".to_string(), "1".to_string()], ["1".to_string(), "2".to_string()]]);
    assert_eq!(w.values, ["2".to_string(), "5/4".to_string()]);
}

#[test]
fn constant_invariant_gives_no_witness() {
    // flat plane connection, constant c: λ(c,c) = μ = 0 and K = 0
    let id = [[Poly::one(), Poly::zero()], [Poly::zero(), Poly::one()]];
    let sol = k0_solve(&id, &Poly::zero(), &Poly::zero(), &[Poly::zero(), Poly::zero()]).unwrap().solution;
    assert!(sol.lambda_cc.is_zero());
    let b = bundle(&sol);
    let r = nonhomogeneity_witness(&b, &sol, &opts()).unwrap();
    assert_eq!(r.status, Status::Indeterminate);
    assert!(r.witness.is_none());
}

#[test]
fn witness_cross_validation_detects_a_different_metric() {
    let sol = lccne_k(1);
    let m = assemble_metric(&sol).unwrap();
    // deform the fibre block; the closed form no longer describes the metric
    let b = Bundle::new(perturbed(&m, 2, 2, &RatFn::var(3).scale(&qr(1, 100))), q(1)).unwrap();
    let pts = CheckOptions { points: vec![[q(0), q(0), q(1), q(1)], [q(1), q(0), q(0), q(2)]], ..opts() };
    let r = nonhomogeneity_witness(&b, &sol, &pts).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.detail.contains("disagrees"));
}

#[test]
fn full_suite_on_lccne() {
    let b = bundle(&lccne_k(1));
    let reps = run_suite(&b, &Check::ALL, &opts()).unwrap();
    assert_eq!(reps.len(), Check::ALL.len());
    for r in &reps {
        assert_eq!(r.status, Status::Pass, "{}: {}", r.name, r.detail);
    }
    assert!(all_passed(&reps));
    let json = serde_json::to_value(&reps).unwrap();
    assert_eq!(json[0]["residualMax"], "0 (exact)");
    assert!(json[0].get("orientationUsed").is_some());
}

#[test]
fn metric_only_input_marks_solution_checks_indeterminate() {
    let b = Bundle::new(assemble_metric(&lccne_k(1)).unwrap(), q(1)).unwrap();
    let reps = run_suite(&b, &[Check::Einstein, Check::Identity, Check::Witness], &opts()).unwrap();
    assert_eq!(reps[0].status, Status::Pass);
    assert_eq!(reps[1].status, Status::Indeterminate);
    assert_eq!(reps[2].status, Status::Indeterminate);
    assert!(!all_passed(&reps));
}

#[test]
fn finite_difference_crosscheck() {
    let b = bundle(&general_family());
    let r = crosscheck_numeric_riemann(&b, &CheckOptions::seeded(1, 5)).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.detail);
    assert!(r.residual_max.value() <= 1e-6);
}

#[test]
fn check_names_roundtrip() {
    for c in Check::ALL {
        assert_eq!(c.name().parse::<Check>().unwrap(), c);
    }
    assert!("bogus".parse::<Check>().is_err());
    assert_eq!("numeric".parse::<Mode>().unwrap(), Mode::Numeric);
}

fn arb_lccne() -> impl Strategy<Value = SolutionData> {
    (-2i64..=2, -2i64..=2, -2i64..=2, -2i64..=2, 0u32..3).prop_map(|(k, c0, a, b, d)| {
        lccne(q(k), q(c0), y1().pow(d).scale(&q(a)), &y1().scale(&q(b)) + &c(1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Every solution passes the exact checks; `W⁻` vanishes for exactly
    /// one orientation.
    #[test]
    fn solutions_pass_the_exact_suite(sol in arb_lccne()) {
        let (a, bb) = residual_eqn(&sol);
        prop_assert!(a.is_zero() && bb.is_zero());
        let b = bundle(&sol);
        let o = CheckOptions::seeded(3, 3);
        let reps = run_suite(&b, &[Check::Einstein, Check::Type3, Check::Identity, Check::Nonwalker], &o).unwrap();
        for r in &reps {
            prop_assert_eq!(r.status, Status::Pass, "{}: {}", r.name, r.detail);
        }
        let other = CheckOptions { orientation: Some(-reps[1].orientation_used.unwrap()), ..o };
        prop_assert!(verify_selfdual(&b, &other).is_err());
    }

    /// Any emitted witness consists of two points with distinct exact values.
    #[test]
    fn witnesses_are_sound(k in -2i64..=2, c0 in -3i64..=3, m in -2i64..=2) {
        let mut sol = lccne(q(k), q(c0), Poly::zero(), Poly::zero());
        sol.mu_ca = Poly::constant(qr(m, 2));
        let inv = sdeinstein::builder::invariant_gamma_u(&sol);
        if let Some(w) = find_witness(&inv, &[[q(0), q(0)], [q(1), q(-1)]]) {
            let parse = |s: &str| sdeinstein::exactfield::parse_q(s).unwrap();
            let base = [parse(&w.base[0]), parse(&w.base[1])];
            let val = |x: &[String; 2]| inv.eval(&[base[0].clone(), base[1].clone(), parse(&x[0]), parse(&x[1])]).unwrap();
            let (va, vb) = (val(&w.fibre[0]), val(&w.fibre[1]));
            prop_assert_ne!(&va, &vb);
            prop_assert_eq!(sdeinstein::exactfield::q_to_string(&va), w.values[0].clone());
        }
    }
}
