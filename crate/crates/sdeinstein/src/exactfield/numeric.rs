//! f64 compilations of exact objects, for the numeric mirrors and solvers.

use super::{q_to_f64, Poly, RatFn, NVARS};

/// Polynomial with f64 coefficients; evaluation avoids bignum conversion.
#[derive(Clone, Debug, Default)]
pub struct NumPoly {
    terms: Vec<([i32; NVARS], f64)>,
}

impl NumPoly {
    pub fn eval(&self, p: &[f64; NVARS]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for i in 0..NVARS {
                if e[i] != 0 {
                    t *= p[i].powi(e[i]);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl From<&Poly> for NumPoly {
    fn from(p: &Poly) -> Self {
        NumPoly {
            terms: p
                .terms()
                .map(|(m, c)| ([m.0[0] as i32, m.0[1] as i32, m.0[2] as i32, m.0[3] as i32], q_to_f64(c)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NumRatFn {
    num: NumPoly,
    den: NumPoly,
}

impl NumRatFn {
    pub fn eval(&self, p: &[f64; NVARS]) -> f64 {
        self.num.eval(p) / self.den.eval(p)
    }
}

impl From<&RatFn> for NumRatFn {
    fn from(r: &RatFn) -> Self {
        NumRatFn { num: r.numer().into(), den: r.denom().into() }
    }
}

/// Fourth-order central first derivative of `f` at `x` with spacing `h`.
pub fn five_point<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}
