#![allow(dead_code)]

use sdeinstein::builder::SolutionData;
use sdeinstein::exactfield::{q, qr, Poly, Q};

pub fn y1() -> Poly {
    Poly::var(0)
}

pub fn y2() -> Poly {
    Poly::var(1)
}

pub fn c(n: i64) -> Poly {
    Poly::int(n)
}

/// λ(c,c) = const0 − y1, λ(a,a) = paa(y1), λ(c,a) = pac(y1), q = μ = 0.
pub fn lccne(k: Q, const0: Q, paa: Poly, pac: Poly) -> SolutionData {
    let mut s = SolutionData::zero(k);
    s.lambda_cc = &Poly::constant(const0) - &y1();
    s.lambda_aa = paa;
    s.lambda_ca = pac;
    s
}

pub fn lccne_k(k: i64) -> SolutionData {
    lccne(q(k), q(1), Poly::zero(), Poly::zero())
}

/// A family with constant μ(a,a) = 1/3, nonzero q and K = 1; λ(c,a) and
/// λ(a,a) are fixed by integrating the y2-equations.
pub fn general_family() -> SolutionData {
    let k = q(1);
    let m = qr(1, 3);
    let mut s = SolutionData::zero(k.clone());
    s.mu_aa = Poly::constant(m.clone());
    s.omega_cq = &y2().scale(&qr(1, 2)) + &y1().scale(&qr(1, 2));
    s.lambda_cc = &c(2) - &y1().scale(&q(2));
    s.omega_aq = &(&y1() * &y2()) + &c(1);
    let t = &s.lambda_cc.scale(&(-&m * q(2))) + &s.omega_cq.scale(&k);
    s.lambda_ca = &t.integrate(1) + &(&y1() * &y1());
    let t = &s.lambda_ca.scale(&(-&m * q(4))) + &s.omega_aq.scale(&(&k * q(2)));
    s.lambda_aa = &t.integrate(1) + &y1();
    s
}
