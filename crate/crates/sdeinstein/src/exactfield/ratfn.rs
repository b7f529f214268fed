use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{Mono, Poly};
use super::{point_to_string, q_sqrt, ExactPoint, Q, NVARS};
use crate::error::{Error, Result};

/// Rational function `num / den` over the chart.
///
/// Canonical form: the denominator is a primitive integer polynomial with
/// positive leading coefficient, no monomial factor is shared between
/// numerator and denominator, and exact polynomial quotients are taken when
/// one side divides the other. This is not a full gcd normal form, so
/// equality is decided by cross-multiplication.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RatFnJson", into = "RatFnJson")]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatFnJson {
    Fraction { num: Poly, den: Poly },
    Poly(Poly),
}

impl TryFrom<RatFnJson> for RatFn {
    type Error = Error;
    fn try_from(j: RatFnJson) -> Result<Self> {
        match j {
            RatFnJson::Fraction { num, den } => RatFn::new(num, den),
            RatFnJson::Poly(p) => Ok(RatFn::from_poly(p)),
        }
    }
}

impl From<RatFn> for RatFnJson {
    fn from(r: RatFn) -> Self {
        if r.den == Poly::one() {
            RatFnJson::Poly(r.num)
        } else {
            RatFnJson::Fraction { num: r.num, den: r.den }
        }
    }
}

impl Default for RatFn {
    fn default() -> Self {
        RatFn::zero()
    }
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZeroFunction);
        }
        Ok(Self::canonical(num, den))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Self::from_poly(Poly::int(n))
    }

    pub fn var(i: usize) -> Self {
        Self::from_poly(Poly::var(i))
    }

    /// `var^(-k)`.
    pub fn var_inv_pow(i: usize, k: u16) -> Self {
        let mut e = [0u16; NVARS];
        e[i] = k;
        RatFn { num: Poly::one(), den: Poly::monomial(Mono(e), Q::one()) }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den == Poly::one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_constant() {
            let d = self.den.as_constant()?;
            self.num.as_constant().map(|n| n / d)
        } else {
            None
        }
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFn::zero();
        }
        let g = num.min_mono().gcd(den.min_mono());
        let (mut num, den) = if g.is_one() { (num, den) } else { (num.div_mono(g), den.div_mono(g)) };
        let (den, c) = den.primitive_part();
        if !c.is_one() {
            num = num.scale(&(Q::one() / c));
        }
        if den.nterms() > 1 {
            if let Some(qt) = num.div_exact(&den) {
                return RatFn { num: qt, den: Poly::one() };
            }
            if num.nterms() > 1 && num.nterms() <= den.nterms() {
                if let Some(qt) = den.div_exact(&num) {
                    let (qt, c) = qt.primitive_part();
                    return RatFn { num: Poly::constant(Q::one() / c), den: qt };
                }
            }
        }
        RatFn { num, den }
    }

    pub fn scale(&self, c: &Q) -> RatFn {
        if c.is_zero() {
            return RatFn::zero();
        }
        RatFn { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFn {
        Self::canonical(&self.num * p, self.den.clone())
    }

    pub fn inv(&self) -> Result<RatFn> {
        RatFn::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, o: &RatFn) -> Result<RatFn> {
        if o.is_zero() {
            return Err(Error::DivisionByZeroFunction);
        }
        Ok(Self::canonical(&self.num * &o.den, &self.den * &o.num))
    }

    pub fn pow(&self, n: u32) -> RatFn {
        RatFn { num: self.num.pow(n), den: self.den.pow(n) }
    }

    pub fn diff(&self, var: usize) -> RatFn {
        if !self.num.involves(var) && !self.den.involves(var) {
            return RatFn::zero();
        }
        if self.den.is_constant() {
            return Self::canonical(self.num.diff(var), self.den.clone());
        }
        // Monomial denominator m: d(n/m) = (n' * x - e n) / (m * x).
        if let Some((m, c)) = self.den.as_monomial() {
            let e = m.0[var];
            let xv = Poly::var(var);
            let top = &(&self.num.diff(var) * &xv) - &self.num.scale(&super::q(e as i64));
            let bot = Poly::monomial(m.product(Mono::var(var)), c.clone());
            return Self::canonical(top, bot);
        }
        let top = &(&self.num.diff(var) * &self.den) - &(&self.num * &self.den.diff(var));
        Self::canonical(top, self.den.pow(2))
    }

    pub fn eval(&self, p: &ExactPoint) -> Result<Q> {
        let d = self.den.eval(p);
        if d.is_zero() {
            return Err(Error::PoleAtPoint(point_to_string(p)));
        }
        Ok(self.num.eval(p) / d)
    }

    pub fn eval_f64(&self, p: &[f64; NVARS]) -> f64 {
        self.num.eval_f64(p) / self.den.eval_f64(p)
    }

    /// Exact square root when both parts are monomials with square
    /// coefficients and even exponents; the sign is chosen positive on the
    /// region where the original function is.
    pub fn sqrt_monomial(&self) -> Option<RatFn> {
        let half = |p: &Poly| -> Option<Poly> {
            let (m, c) = p.as_monomial()?;
            let r = q_sqrt(c)?;
            let mut e = m.0;
            for x in e.iter_mut() {
                if *x % 2 != 0 {
                    return None;
                }
                *x /= 2;
            }
            Some(Poly::monomial(Mono(e), r))
        };
        Some(RatFn { num: half(&self.num)?, den: half(&self.den)? })
    }
}

impl PartialEq for RatFn {
    fn eq(&self, o: &Self) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        &self.num * &o.den == &o.num * &self.den
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

fn add_impl(a: &RatFn, b: &RatFn, negate_b: bool) -> RatFn {
    let bn = if negate_b { -&b.num } else { b.num.clone() };
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return RatFn { num: bn, den: b.den.clone() };
    }
    if a.den == b.den {
        return RatFn::canonical(&a.num + &bn, a.den.clone());
    }
    // Both denominators monomial: common denominator is the lcm.
    if let (Some((ma, ca)), Some((mb, cb))) = (a.den.as_monomial(), b.den.as_monomial()) {
        if ca.is_one() && cb.is_one() {
            let l = ma.lcm(mb);
            let top = &a.num.mul_mono(ma.div_into(l)) + &bn.mul_mono(mb.div_into(l));
            return RatFn::canonical(top, Poly::monomial(l, Q::one()));
        }
    }
    if let Some(k) = b.den.div_exact(&a.den) {
        return RatFn::canonical(&(&a.num * &k) + &bn, b.den.clone());
    }
    if let Some(k) = a.den.div_exact(&b.den) {
        return RatFn::canonical(&a.num + &(&bn * &k), a.den.clone());
    }
    RatFn::canonical(&(&a.num * &b.den) + &(&bn * &a.den), &a.den * &b.den)
}

impl<'a> Add<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn add(self, o: &RatFn) -> RatFn {
        add_impl(self, o, false)
    }
}

impl<'a> Sub<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn sub(self, o: &RatFn) -> RatFn {
        add_impl(self, o, true)
    }
}

impl<'a> Mul<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn mul(self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        if self.den == Poly::one() && o.den == Poly::one() {
            return RatFn { num: &self.num * &o.num, den: Poly::one() };
        }
        RatFn::canonical(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFn> for RatFn {
            type Output = RatFn;
            fn $m(self, o: RatFn) -> RatFn {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<Poly> for RatFn {
    fn from(p: Poly) -> Self {
        RatFn::from_poly(p)
    }
}

/// Sum of an iterator of rational functions.
pub fn sum<I: IntoIterator<Item = RatFn>>(it: I) -> RatFn {
    it.into_iter().fold(RatFn::zero(), |acc, x| &acc + &x)
}

impl Zero for RatFn {
    fn zero() -> Self {
        RatFn::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFn {
    fn one() -> Self {
        RatFn::one()
    }
}
