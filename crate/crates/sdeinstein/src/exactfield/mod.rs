//! Exact arithmetic on the chart: sparse polynomials and rational functions in
//! `(y1, y2, x1, x2)` over the rationals, their numeric (f64) compilations,
//! and small exact linear algebra.

pub mod linalg;
pub mod numeric;
pub mod poly;
pub mod ratfn;

pub use numeric::{NumPoly, NumRatFn};
pub use poly::{Mono, Poly};
pub use ratfn::{sum, RatFn};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

/// Number of chart coordinates; slots are `y1, y2, x1, x2`.
pub const NVARS: usize = 4;
pub const VAR_NAMES: [&str; NVARS] = ["y1", "y2", "x1", "x2"];

pub type ExactPoint = [Q; NVARS];
pub type FloatPoint = [f64; NVARS];

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Very large parts: divide in floating point after scaling down.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn q_to_string(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    if let Ok(v) = t.parse::<Q>() {
        return Ok(v);
    }
    // Allow plain decimals like "0.25" as exact decimal fractions.
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches('-'), fp);
        if let Ok(n) = digits.parse::<BigInt>() {
            let d = num_traits::pow(BigInt::from(10), fp.len());
            let v = Q::new(n, d);
            return Ok(if neg { -v } else { v });
        }
    }
    Err(Error::Parse(format!("not a rational number: {s:?}")))
}

/// Exact rational square root, if one exists.
pub fn q_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

pub fn point_to_f64(p: &ExactPoint) -> FloatPoint {
    [q_to_f64(&p[0]), q_to_f64(&p[1]), q_to_f64(&p[2]), q_to_f64(&p[3])]
}

pub fn point_to_string(p: &ExactPoint) -> String {
    let parts: Vec<String> = p.iter().map(q_to_string).collect();
    format!("({})", parts.join(", "))
}

/// Rational scalar as it appears in JSON: `"p/q"` strings or plain integers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QJson {
    Str(String),
    Int(i64),
}

impl QJson {
    pub fn to_q(&self) -> Result<Q> {
        match self {
            QJson::Str(s) => parse_q(s),
            QJson::Int(i) => Ok(q(*i)),
        }
    }
}

impl From<&Q> for QJson {
    fn from(x: &Q) -> Self {
        QJson::Str(q_to_string(x))
    }
}

/// Seeded sampler for rational chart points with small denominators.
/// `x2` is kept in `[1/2, 2]` so the fibre coordinate `phi = x2` stays away
/// from zero.
pub struct PointSampler {
    rng: ChaCha8Rng,
}

impl PointSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn small_rational(&mut self, lo: i64, hi: i64) -> Q {
        let den: i64 = self.rng.gen_range(1..=4);
        let num: i64 = self.rng.gen_range(lo * den..=hi * den);
        qr(num, den)
    }

    pub fn next_point(&mut self) -> ExactPoint {
        let y1 = self.small_rational(-2, 2);
        let y2 = self.small_rational(-2, 2);
        let x1 = self.small_rational(-2, 2);
        let den: i64 = self.rng.gen_range(1..=4);
        let num: i64 = self.rng.gen_range((den + 1) / 2..=2 * den);
        [y1, y2, x1, qr(num, den)]
    }

    pub fn points(&mut self, n: usize) -> Vec<ExactPoint> {
        (0..n).map(|_| self.next_point()).collect()
    }
}
