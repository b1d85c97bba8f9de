//! Points of the complex plane with exact-rational or floating coordinates.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Error produced when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?} (expected \"p\" or \"p/q\")")]
pub struct ParseRationalError(pub String);

/// Parse `"p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

/// Canonical `"p/q"` text of a rational (`"p"` when the denominator is 1).
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Lossy conversion to `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow of huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Rational from a small integer fraction.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A point of the plane with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub re: Rational,
    pub im: Rational,
}

impl Point {
    pub fn new(re: Rational, im: Rational) -> Self {
        Point { re, im }
    }

    /// Point from integer coordinates.
    pub fn int(re: i64, im: i64) -> Self {
        Point::new(Rational::from_integer(re.into()), Rational::from_integer(im.into()))
    }

    /// Point from `(num/den, num/den)` pairs.
    pub fn frac(re: (i64, i64), im: (i64, i64)) -> Self {
        Point::new(ratio(re.0, re.1), ratio(im.0, im.1))
    }

    /// Parse a point from two rational literals.
    pub fn parse(re: &str, im: &str) -> Result<Self, ParseRationalError> {
        Ok(Point::new(parse_rational(re)?, parse_rational(im)?))
    }

    pub fn origin() -> Self {
        Point::new(Rational::zero(), Rational::zero())
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(&self.re - &other.re, &self.im - &other.im)
    }

    /// Complex product.
    pub fn mul(&self, other: &Point) -> Point {
        Point::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn scale(&self, s: &Rational) -> Point {
        Point::new(&self.re * s, &self.im * s)
    }

    /// `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &Point, t: &Rational) -> Point {
        let one_minus = Rational::one() - t;
        self.scale(&one_minus).add(&other.scale(t))
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        self.lerp(other, &ratio(1, 2))
    }

    /// Squared modulus, exact.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Exact squared distance.
    pub fn dist_sqr(&self, other: &Point) -> Rational {
        self.sub(other).norm_sqr()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        rational_to_f64(&self.dist_sqr(other)).sqrt()
    }

    /// Cross product of two displacement vectors.
    pub fn cross(&self, other: &Point) -> Rational {
        &self.re * &other.im - &self.im * &other.re
    }

    pub fn dot(&self, other: &Point) -> Rational {
        &self.re * &other.re + &self.im * &other.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Lexicographic order on `(re, im)`.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [format_rational(&self.re), format_rational(&self.im)].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(deserializer)?;
        Point::parse(&re, &im).map_err(D::Error::custom)
    }
}

/// Serde adapter for a single rational stored as a `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

/// A plane point tagged with its coordinate backing.
///
/// Exact points convert losslessly to floats; there is no conversion back.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplexPoint {
    Exact(Point),
    Float(Complex64),
}

impl ComplexPoint {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            ComplexPoint::Exact(p) => p.to_complex(),
            ComplexPoint::Float(z) => *z,
        }
    }

    pub fn as_exact(&self) -> Option<&Point> {
        match self {
            ComplexPoint::Exact(p) => Some(p),
            ComplexPoint::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ComplexPoint::Exact(_))
    }

    /// Midpoint; exact when both operands are exact.
    pub fn midpoint(&self, other: &ComplexPoint) -> ComplexPoint {
        match (self, other) {
            (ComplexPoint::Exact(a), ComplexPoint::Exact(b)) => ComplexPoint::Exact(a.midpoint(b)),
            _ => ComplexPoint::Float((self.to_complex() + other.to_complex()) * 0.5),
        }
    }
}

impl From<Point> for ComplexPoint {
    fn from(p: Point) -> Self {
        ComplexPoint::Exact(p)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        ComplexPoint::Float(z)
    }
}

/// Sign of a rational as -1, 0 or +1.
pub fn sign(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), ratio(-7, 1));
        assert_eq!(format_rational(&ratio(3, 2)), "3/2");
        assert_eq!(format_rational(&ratio(4, 2)), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn exact_arithmetic() {
        let a = Point::int(1, 1);
        let b = Point::int(1, 2);
        assert_eq!(a.midpoint(&b), Point::frac((1, 1), (3, 2)));
        let i = Point::int(0, 1);
        assert_eq!(i.mul(&i), Point::int(-1, 0));
        assert_eq!(Point::int(3, 4).norm_sqr(), ratio(25, 1));
    }

    #[test]
    fn serde_roundtrip() {
        let p = Point::frac((-1, 3), (5, 7));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["-1/3","5/7"]"#);
        let back: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn mixed_midpoint_degrades_to_float() {
        let a = ComplexPoint::Exact(Point::int(0, 0));
        let b = ComplexPoint::Float(Complex64::new(2.0, 0.0));
        assert_eq!(a.midpoint(&b), ComplexPoint::Float(Complex64::new(1.0, 0.0)));
        let c = ComplexPoint::Exact(Point::int(2, 0));
        assert_eq!(a.midpoint(&c), ComplexPoint::Exact(Point::int(1, 0)));
    }
}
