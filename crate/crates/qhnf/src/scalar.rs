//! Coefficient rings the engine is generic over.
//!
//! Every symbolic routine is written against [`Scalar`].  Exact work uses
//! [`Rational`]; the FitzHugh-Nagumo case study uses `f64`; the parametric
//! Hopf-zero computation uses a first-order truncated ring defined in
//! [`crate::hopfzero::ParamScalar`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always reduced with positive denominator.
pub type Rational = BigRational;

/// Absolute threshold below which an `f64` entry is not used as a pivot.
pub const FLOAT_PIVOT_EPS: f64 = 1e-11;

/// A commutative ring with enough structure for graded linear algebra.
///
/// Pivoting only ever divides by elements for which [`Scalar::inverse`]
/// succeeds, so local rings such as `Q[eps, delta]/(eps, delta)^2` qualify.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    fn from_rational(q: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Multiplicative inverse, `None` for non-units.
    fn inverse(&self) -> Option<Self>;

    /// Preference when choosing a pivot; `None` marks an unusable entry.
    fn pivot_weight(&self) -> Option<f64>;

    /// True when the element is zero up to the ring's working precision.
    fn negligible(&self) -> bool;

    /// Leading numeric value (parameters set to zero).
    fn approx(&self) -> f64;

    /// `(is_negative, magnitude)` used by the text printer; rings without an
    /// order report `false` and print themselves whole.
    fn sign_split(&self) -> (bool, Self) {
        (false, self.clone())
    }

    fn div_unit(&self, d: &Self) -> Option<Self> {
        d.inverse().map(|i| self.clone() * i)
    }
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn pivot_weight(&self) -> Option<f64> {
        if self.is_zero() {
            None
        } else {
            Some(1.0)
        }
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn sign_split(&self) -> (bool, Self) {
        (self.is_negative(), self.abs())
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn inverse(&self) -> Option<Self> {
        if self.abs() > FLOAT_PIVOT_EPS {
            Some(1.0 / self)
        } else {
            None
        }
    }
    fn pivot_weight(&self) -> Option<f64> {
        if self.abs() > FLOAT_PIVOT_EPS {
            Some(self.abs())
        } else {
            None
        }
    }
    fn negligible(&self) -> bool {
        self.abs() <= FLOAT_PIVOT_EPS
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn sign_split(&self) -> (bool, Self) {
        (*self < 0.0, self.abs())
    }
}

/// Parses `p/q`, an integer, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit())
            || !ip_digits.chars().all(|c| c.is_ascii_digit())
            || (ip_digits.is_empty() && fp.is_empty())
        {
            return None;
        }
        let digits = format!("{ip_digits}{fp}");
        let n: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().ok()?
        };
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let q = Rational::new(n, d);
        return Some(if neg { -q } else { q });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Exact rational `n/d` shorthand.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Serializes a rational as `"p/q"` or `"p"`.
pub fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a value that may be rational (`1/2`) or floating (`1e-4`).
pub fn parse_real(s: &str) -> Option<f64> {
    parse_rational(s)
        .and_then(|r| r.to_f64())
        .or_else(|| s.trim().parse::<f64>().ok())
        .filter(|x| x.is_finite())
}

pub fn is_one<S: Scalar>(s: &S) -> bool {
    (s.clone() - S::one()).negligible()
}

/// Returns true when `a - b` is negligible in the ring.
pub fn close<S: Scalar>(a: &S, b: &S) -> bool {
    (a.clone() - b.clone()).negligible()
}
