//! Solution theory of the two-plane system: residuals, the explicit family
//! with `λ(c,c)` affine in `y1`, the reformulation as a connection with a
//! pair of sections, normal forms of `SL(2)`-connections, the method of
//! characteristics, gauge fixing, and the flat and `K = 0` constructions.

pub mod characteristics;
pub mod connection;
pub mod exppoly;
pub mod special;

pub use characteristics::{
    characteristics_solve, convergence_study, Axis, CharGrid, ConvergenceReport, InitialCurve, QuasiLinearPDE,
    SampledSolution,
};
pub use connection::{
    classify_connection, connection_normal_form, residual_brd, to_connection_pair, to_solution_data, BrdResidual,
    ConnectionClass, NormalCase, NormalFormData, PlaneConnection, PointClass, SectionPair,
};
pub use exppoly::{ExpPoly, NumExpPoly};
pub use special::{flat_case_solve, gauge_fix, gauge_pde, k0_solve, FlatSolution, GaugeFix, K0Solution};

use crate::builder::{d, omega, phi, radial, sym_form, vc, SolutionData};
use crate::error::{Error, Result};
use crate::exactfield::{q, Poly, RatFn, Q};

/// Residuals of the two-plane system. The first is cubic in the fibre
/// coordinates, the second depends on `(y1, y2)` only; `sol` is a solution
/// iff both vanish identically.
pub fn residual_eqn(sol: &SolutionData) -> (RatFn, RatFn) {
    let x = radial();
    let c = vc();
    let qv = sol.q_vec();
    let k = RatFn::constant(sol.k.clone());
    let ph = phi();
    let lam_xx_2 = sym_form(&sol.lambda_cc.diff(1), &sol.lambda_ca.diff(1), &sol.lambda_aa.diff(1), &x, &x);
    let mu_xx_1 = sym_form(&sol.mu_cc.diff(0), &sol.mu_ca.diff(0), &sol.mu_aa.diff(0), &x, &x);
    let first = &(&(&(&mu_xx_1.scale(&q(2)) - &lam_xx_2) * &ph)
        - &(&sol.lambda(&c, &x) * &sol.mu(&x, &x)).scale(&q(4)))
        + &(&(&sol.mu(&c, &x) * &sol.lambda(&x, &x)).scale(&q(4))
            + &(&(&k * &(&ph * &ph)) * &omega(&x, &qv)).scale(&q(2)));
    let second = &(&(&d(&sol.lambda_cc, 0) + &d(&sol.omega_cq, 1).scale(&q(2))) - &sol.mu(&qv, &c).scale(&q(4)))
        + &RatFn::one();
    (first, second)
}

/// The four component equations in the basis `(c, a)`, as residuals
/// (left side minus right side), ordered `cc`, `aa`, `ac`, and the
/// `q`-equation. The first three are the `(x1)²`, `(x2)²` and half the
/// `x1 x2` coefficient of the first residual of [`residual_eqn`] divided by
/// `φ`.
pub fn residual_loc(sol: &SolutionData) -> [Poly; 4] {
    let k = Poly::constant(sol.k.clone());
    let (lcc, lca, laa) = (&sol.lambda_cc, &sol.lambda_ca, &sol.lambda_aa);
    let (mcc, mca, maa) = (&sol.mu_cc, &sol.mu_ca, &sol.mu_aa);
    let (ocq, oaq) = (&sol.omega_cq, &sol.omega_aq);
    let two = q(2);
    let four = q(4);
    let e1 = &(&(&mcc.diff(0).scale(&two) - &lcc.diff(1)) - &(lcc * mca).scale(&four)) + &(mcc * lca).scale(&four);
    let e2 = &(&(&(&maa.diff(0).scale(&two) - &laa.diff(1)) - &(lca * maa).scale(&four)) + &(mca * laa).scale(&four))
        + &(&k * oaq).scale(&two);
    let e3 = &(&(&(&mca.diff(0).scale(&two) - &lca.diff(1)) - &(lcc * maa).scale(&two)) + &(mcc * laa).scale(&two))
        + &(&k * ocq);
    let e4 = &(&(&(&lcc.diff(0) + &ocq.diff(1).scale(&two)) - &(oaq * mcc).scale(&four)) + &(ocq * mca).scale(&four))
        + &Poly::one();
    [e1, e2, e3, e4]
}

/// `q = μ = 0`, `λ(c,c) = const0 − y1`, `λ(a,a) = paa(y1)`, `λ(c,a) = pac(y1)`.
pub fn lccne_generate(k: Q, const0: Q, paa: Poly, pac: Poly) -> Result<SolutionData> {
    for p in [&paa, &pac] {
        if (1..4).any(|v| p.involves(v)) {
            return Err(Error::Parse(format!("expected a polynomial in y1 only, got {p}")));
        }
    }
    let mut sol = SolutionData::zero(k);
    sol.lambda_cc = &Poly::constant(const0) - &Poly::var(0);
    sol.lambda_aa = paa;
    sol.lambda_ca = pac;
    Ok(sol)
}

/// The canonical test instance: `K` given, `λ(c,c) = 1 − y1`, everything
/// else zero.
pub fn lccne_canonical(k: Q) -> SolutionData {
    lccne_generate(k, q(1), Poly::zero(), Poly::zero()).expect("constant data")
}
