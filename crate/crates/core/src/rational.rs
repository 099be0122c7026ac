//! Exact rational scalars and the small numeric toolkit shared by the geometry modules.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for every coordinate that the model keeps exact.
pub type Rational = Ratio<i128>;

/// Absolute tolerance for comparisons that involve arclength (irrational) parameters.
pub const ARC_TOL: f64 = 1e-9;

pub fn rat(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn to_f64(x: &Rational) -> f64 {
    ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Square root of a nonnegative rational, in floating point.
pub fn sqrt_f64(x: &Rational) -> f64 {
    to_f64(x).max(0.0).sqrt()
}

/// Parses `p/q`, `p` or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 18 {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let w: i128 = if whole.is_empty() || whole == "-" || whole == "+" {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let den = 10i128.pow(frac.len() as u32);
        let f: i128 = frac.parse().map_err(|_| bad())?;
        let mag = Rational::from_integer(w.abs()) + Rational::new(f, den);
        return Ok(if negative { -mag } else { mag });
    }
    s.parse::<i128>().map(Rational::from_integer).map_err(|_| bad())
}

/// Formats as `p/q` with an explicit denominator, the wire form used in every file format.
pub fn fmt_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Wrapper whose `Display` is the `p/q` wire form.
pub struct Pq<'a>(pub &'a Rational);

impl fmt::Display for Pq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// The rational with the smallest denominator (then smallest absolute numerator) in `[lo, hi]`.
///
/// Walks the Stern–Brocot tree; both endpoints are inclusive.
pub fn simplest_in(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi, "empty interval");
    if lo.is_positive() {
        simplest_positive(lo, hi)
    } else if hi.is_negative() {
        -simplest_positive(&-*hi, &-*lo)
    } else {
        <Rational as Zero>::zero()
    }
}

fn simplest_positive(lo: &Rational, hi: &Rational) -> Rational {
    // Continued-fraction descent: lo > 0.
    let up = lo.ceil();
    if up <= *hi {
        return up;
    }
    let fl = lo.floor();
    let rest = simplest_positive(&(*hi - fl).recip(), &(*lo - fl).recip());
    fl + rest.recip()
}

/// Exact test of `sqrt(a) <= lambda * sqrt(b) + c` for nonnegative `a, b, lambda, c`.
pub fn sqrt_le_affine(a: &Rational, lambda: &Rational, b: &Rational, c: &Rational) -> bool {
    // a - lambda^2 b - c^2 <= 2 lambda c sqrt(b)
    let lhs = *a - *lambda * *lambda * *b - *c * *c;
    if !lhs.is_positive() {
        return true;
    }
    let rhs_factor = Rational::from_integer(2) * *lambda * *c;
    if !rhs_factor.is_positive() {
        return false;
    }
    lhs * lhs <= rhs_factor * rhs_factor * *b
}

/// Exact test of `sqrt(a) <= bound` for a nonnegative rational bound.
pub fn sqrt_le(a: &Rational, bound: &Rational) -> bool {
    !bound.is_negative() && *a <= *bound * *bound
}

/// The smallest multiple of `1/den` whose square is at least `x2`.
pub fn sqrt_ceil_grid(x2: &Rational, den: i128) -> Rational {
    let mut j = (to_f64(x2).max(0.0).sqrt() * den as f64).floor() as i128 - 1;
    j = j.max(0);
    while Rational::new(j * j, den * den) < *x2 {
        j += 1;
    }
    Rational::new(j, den)
}

/// Scalar field for tree and product-space coordinates: exact rationals or `f64`.
pub trait Scalar:
    Copy
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn floor_int(&self) -> i64;
    fn ceil_int(&self) -> i64;
    fn to_f64(&self) -> f64;
    fn is_exact() -> bool;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(n: i64) -> Self {
        Rational::from_integer(n as i128)
    }
    fn from_rational(q: &Rational) -> Self {
        *q
    }
    fn floor_int(&self) -> i64 {
        self.numer().div_floor(self.denom()) as i64
    }
    fn ceil_int(&self) -> i64 {
        self.numer().div_ceil(self.denom()) as i64
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_rational(q: &Rational) -> Self {
        to_f64(q)
    }
    fn floor_int(&self) -> i64 {
        self.floor() as i64
    }
    fn ceil_int(&self) -> i64 {
        self.ceil() as i64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

/// Minimum of `a t^2 + b t + c` over `[lo, hi]` (`hi = None` means unbounded above), `a > 0`.
///
/// Returns `(value, argmin)`; the argmin is the smallest minimizer.
pub fn min_quadratic<S: Scalar>(a: S, b: S, c: S, lo: S, hi: Option<S>) -> (S, S) {
    let two = S::from_int(2);
    let eval = |t: S| a * t * t + b * t + c;
    let mut t = -b / (two * a);
    if t < lo {
        t = lo;
    }
    if let Some(h) = hi {
        if t > h {
            t = h;
        }
    }
    (eval(t), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wire_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(fmt_rational(&int(0)), "0/1");
    }

    #[test]
    fn simplest_rational_walks_stern_brocot() {
        assert_eq!(simplest_in(&rat(57, 100), &rat(77, 100)), rat(2, 3));
        assert_eq!(simplest_in(&rat(335, 100), &rat(465, 100)), int(4));
        assert_eq!(simplest_in(&rat(-1, 10), &rat(1, 10)), int(0));
        assert_eq!(simplest_in(&rat(-77, 100), &rat(-57, 100)), rat(-2, 3));
        assert_eq!(simplest_in(&rat(1, 3), &rat(1, 3)), rat(1, 3));
        assert_eq!(simplest_in(&rat(14, 10), &rat(16, 10)), rat(3, 2));
        assert_eq!(simplest_in(&rat(1, 4), &rat(42, 100)), rat(1, 3));
    }

    #[test]
    fn affine_sqrt_comparison_is_exact() {
        // sqrt(8) <= 2 sqrt(2) + 0 holds with equality.
        assert!(sqrt_le_affine(&int(8), &int(2), &int(2), &int(0)));
        assert!(!sqrt_le_affine(&int(9), &int(2), &int(2), &int(0)));
        // sqrt(9) <= 1*sqrt(4) + 1
        assert!(sqrt_le_affine(&int(9), &int(1), &int(4), &int(1)));
        assert!(!sqrt_le_affine(&rat(901, 100), &int(1), &int(4), &int(1)));
    }

    #[test]
    fn quadratic_minimum_clamps() {
        let (v, t) = min_quadratic(int(1), int(-4), int(5), int(0), Some(int(1)));
        assert_eq!((v, t), (int(2), int(1)));
        let (v, t) = min_quadratic(int(1), int(-4), int(5), int(0), None);
        assert_eq!((v, t), (int(1), int(2)));
    }
}
