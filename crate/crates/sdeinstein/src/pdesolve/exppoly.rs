//! Finite sums `Σ p_i · exp(e_i)` with polynomial coefficients and
//! polynomial exponents in `(y1, y2)`. Closed under the ring operations and
//! differentiation, which is all the plane-connection layer needs; the
//! exponentials of the normal forms stay exact until numeric evaluation.
//!
//! Zero detection is sound (an `ExpPoly` reported zero is zero). Exponents
//! differing by a nonzero constant are kept apart, so such sums may fail to
//! cancel.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::exactfield::{NumPoly, Poly, Q};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpPoly {
    /// exponent -> coefficient; coefficients are nonzero
    terms: BTreeMap<Poly, Poly>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::term(p, Poly::zero())
    }

    pub fn constant(c: Q) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// `exp(e)`
    pub fn exp(e: Poly) -> Self {
        Self::term(Poly::one(), e)
    }

    /// `p · exp(e)`
    pub fn term(p: Poly, e: Poly) -> Self {
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(e, p);
        }
        ExpPoly { terms }
    }

    fn add_term(&mut self, e: &Poly, p: Poly) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(e) {
            Some(old) => {
                let s = &*old + &p;
                if s.is_zero() {
                    self.terms.remove(e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e.clone(), p);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The polynomial value when no exponential survives.
    pub fn as_poly(&self) -> Option<Poly> {
        match self.terms.len() {
            0 => Some(Poly::zero()),
            1 => self.terms.get(&Poly::zero()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Poly, &Poly)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = ExpPoly::zero();
        for (e, p) in &self.terms {
            out.add_term(e, p.scale(c));
        }
        out
    }

    pub fn mul_poly(&self, q: &Poly) -> Self {
        let mut out = ExpPoly::zero();
        for (e, p) in &self.terms {
            out.add_term(e, p * q);
        }
        out
    }

    /// `∂/∂y_var`
    pub fn diff(&self, var: usize) -> Self {
        let mut out = ExpPoly::zero();
        for (e, p) in &self.terms {
            out.add_term(e, &p.diff(var) + &(p * &e.diff(var)));
        }
        out
    }

    pub fn eval_f64(&self, y1: f64, y2: f64) -> f64 {
        let pt = [y1, y2, 0.0, 0.0];
        self.terms.iter().map(|(e, p)| p.eval_f64(&pt) * e.eval_f64(&pt).exp()).sum()
    }

    pub fn numeric(&self) -> NumExpPoly {
        NumExpPoly {
            terms: self.terms.iter().map(|(e, p)| (NumPoly::from(p), NumPoly::from(e), e.is_zero())).collect(),
        }
    }
}

/// Compiled form for hot numeric loops.
#[derive(Clone, Debug)]
pub struct NumExpPoly {
    terms: Vec<(NumPoly, NumPoly, bool)>,
}

impl NumExpPoly {
    pub fn eval(&self, y1: f64, y2: f64) -> f64 {
        let pt = [y1, y2, 0.0, 0.0];
        self.terms
            .iter()
            .map(|(p, e, plain)| if *plain { p.eval(&pt) } else { p.eval(&pt) * e.eval(&pt).exp() })
            .sum()
    }
}

impl From<Poly> for ExpPoly {
    fn from(p: Poly) -> Self {
        ExpPoly::from_poly(p)
    }
}

impl<'a> Add<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn add(self, o: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (e, p) in &o.terms {
            out.add_term(e, p.clone());
        }
        out
    }
}

impl<'a> Sub<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn sub(self, o: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (e, p) in &o.terms {
            out.add_term(e, -p);
        }
        out
    }
}

impl<'a> Mul<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn mul(self, o: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (e1, p1) in &self.terms {
            for (e2, p2) in &o.terms {
                out.add_term(&(e1 + e2), p1 * p2);
            }
        }
        out
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        ExpPoly { terms: self.terms.iter().map(|(e, p)| (e.clone(), -p)).collect() }
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, p)| if e.is_zero() { format!("({p})") } else { format!("({p})*exp({e})") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
