use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{q, q_to_f64, q_to_string, ExactPoint, QJson, Q, NVARS, VAR_NAMES};
use crate::error::{Error, Result};

/// Exponent vector over `(y1, y2, x1, x2)`, ordered graded-lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(pub [u16; NVARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; NVARS]);

    pub fn var(i: usize) -> Mono {
        let mut e = [0; NVARS];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn product(self, o: Mono) -> Mono {
        let mut e = self.0;
        for i in 0..NVARS {
            e[i] += o.0[i];
        }
        Mono(e)
    }

    pub fn divides(&self, o: &Mono) -> bool {
        (0..NVARS).all(|i| self.0[i] <= o.0[i])
    }

    /// `o / self`; caller guarantees divisibility.
    pub fn div_into(self, o: Mono) -> Mono {
        let mut e = o.0;
        for i in 0..NVARS {
            e[i] -= self.0[i];
        }
        Mono(e)
    }

    pub fn gcd(self, o: Mono) -> Mono {
        let mut e = self.0;
        for i in 0..NVARS {
            e[i] = e[i].min(o.0[i]);
        }
        Mono(e)
    }

    pub fn lcm(self, o: Mono) -> Mono {
        let mut e = self.0;
        for i in 0..NVARS {
            e[i] = e[i].max(o.0[i]);
        }
        Mono(e)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
/// No stored coefficient is ever zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<TermJson>", into = "Vec<TermJson>")]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub e: Vec<u16>,
    pub c: QJson,
}

impl TryFrom<Vec<TermJson>> for Poly {
    type Error = Error;
    fn try_from(v: Vec<TermJson>) -> Result<Self> {
        let mut p = Poly::zero();
        for t in v {
            if t.e.len() > NVARS {
                return Err(Error::Parse(format!("exponent vector too long: {:?}", t.e)));
            }
            let mut e = [0u16; NVARS];
            e[..t.e.len()].copy_from_slice(&t.e);
            p.add_term(Mono(e), t.c.to_q()?);
        }
        Ok(p)
    }
}

impl From<Poly> for Vec<TermJson> {
    fn from(p: Poly) -> Self {
        p.terms
            .iter()
            .map(|(m, c)| TermJson { e: m.0.to_vec(), c: QJson::from(c) })
            .collect()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(Mono::ONE, c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(q(n))
    }

    pub fn var(i: usize) -> Self {
        Self::monomial(Mono::var(i), Q::one())
    }

    pub fn monomial(m: Mono, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    /// Polynomial in a single variable from ascending coefficients.
    pub fn univariate(var: usize, coeffs: &[Q]) -> Self {
        let mut p = Poly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = [0u16; NVARS];
            e[var] = k as u16;
            p.add_term(Mono(e), c.clone());
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        if self.is_constant() {
            return self.terms.get(&Mono::ONE).cloned();
        }
        None
    }

    /// Single-term polynomial, if it is one.
    pub fn as_monomial(&self) -> Option<(Mono, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (*m, c))
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    /// Depends on variable `var` at all.
    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    /// Componentwise minimal exponent over all terms.
    pub fn min_mono(&self) -> Mono {
        let mut it = self.terms.keys();
        match it.next() {
            None => Mono::ONE,
            Some(first) => it.fold(*first, |acc, m| acc.gcd(*m)),
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    pub fn mul_mono(&self, m: Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, v)| (k.product(m), v.clone())).collect() }
    }

    /// Divide every term by `m`; caller guarantees divisibility.
    pub fn div_mono(&self, m: Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, v)| (m.div_into(*k), v.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn diff(&self, var: usize) -> Poly {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut nm = *m;
            nm.0[var] -= 1;
            out.insert(nm, c * q(e as i64));
        }
        Poly { terms: out }
    }

    /// Antiderivative in `var` vanishing at `var = 0`.
    pub fn integrate(&self, var: usize) -> Poly {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut nm = *m;
            nm.0[var] += 1;
            out.insert(nm, c / q(nm.0[var] as i64));
        }
        Poly { terms: out }
    }

    /// Replace variable `var` by the constant `val`.
    pub fn substitute(&self, var: usize, val: &Q) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut nm = *m;
            let e = nm.0[var];
            nm.0[var] = 0;
            out.add_term(nm, c * num_traits::pow(val.clone(), e as usize));
        }
        out
    }

    /// Replace each variable by a polynomial.
    pub fn compose(&self, subs: &[Poly; NVARS]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for i in 0..NVARS {
                if m.0[i] > 0 {
                    t = &t * &subs[i].pow(m.0[i] as u32);
                }
            }
            out = &out + &t;
        }
        out
    }

    pub fn eval(&self, p: &ExactPoint) -> Q {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..NVARS {
                if m.0[i] > 0 {
                    t *= num_traits::pow(p[i].clone(), m.0[i] as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, p: &[f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = q_to_f64(c);
                for i in 0..NVARS {
                    if m.0[i] > 0 {
                        t *= p[i].powi(m.0[i] as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients. Zero for the zero polynomial.
    pub fn content(&self) -> Q {
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        if g.is_zero() {
            return Q::zero();
        }
        Q::new(g, l)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        let (lm, lc) = (*lm, lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            if !lm.divides(rm) {
                return None;
            }
            let m = lm.div_into(*rm);
            let c = rc / &lc;
            rem = &rem - &d.mul_mono(m).scale(&c);
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Multiply by the sign-adjusted content so the result is primitive with
    /// a positive leading coefficient. Returns `(primitive, factor)` with
    /// `self = factor * primitive`.
    pub fn primitive_part(&self) -> (Poly, Q) {
        if self.is_zero() {
            return (Poly::zero(), Q::one());
        }
        let mut c = self.content();
        if self.leading().map(|(_, v)| v.is_negative()).unwrap_or(false) {
            c = -c;
        }
        let inv = Q::one() / &c;
        (self.scale(&inv), c)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut factors = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(q_to_string(&a));
            }
            for i in 0..NVARS {
                match m.0[i] {
                    0 => {}
                    1 => factors.push(VAR_NAMES[i].to_string()),
                    e => factors.push(format!("{}^{}", VAR_NAMES[i], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= o.terms.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut acc: std::collections::HashMap<Mono, Q> =
            std::collections::HashMap::with_capacity(self.terms.len() * o.terms.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let e = acc.entry(m1.product(*m2)).or_insert_with(Q::zero);
                *e += c1 * c2;
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
