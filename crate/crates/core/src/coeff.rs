//! Exact coefficient arithmetic: rationals with a machine-word fast path, and
//! Gaussian rationals built on top of them.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact rational number.
///
/// Values whose reduced numerator and denominator fit in an `i64` are kept
/// inline; everything else spills to a `BigRational`. The representation is
/// canonical, so derived equality and hashing are value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Q {
    Small(i64, i64),
    Big(BigRational),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Q {
    pub fn zero() -> Self {
        Q::Small(0, 1)
    }

    pub fn one() -> Self {
        Q::Small(1, 1)
    }

    pub fn from_int(n: i64) -> Self {
        Q::Small(n, 1)
    }

    /// `num / den`; panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Self {
        let (mut n, mut d) = (num, den);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Q::zero();
        }
        let g = gcd_i128(n, d);
        n /= g;
        d /= g;
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Q::Small(n, d),
            _ => Q::Big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(r),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(r) => r.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Q::Small(1, 1))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Q::Small(n, _) => *n < 0,
            Q::Big(r) => r.is_negative(),
        }
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "division by zero");
        match self {
            Q::Small(n, d) => Q::from_i128(*d as i128, *n as i128),
            Q::Big(r) => Q::from_big(r.recip()),
        }
    }

    /// Numerator and denominator as decimal strings.
    pub fn parts(&self) -> (String, String) {
        match self {
            Q::Small(n, d) => (n.to_string(), d.to_string()),
            Q::Big(r) => (r.numer().to_string(), r.denom().to_string()),
        }
    }

    /// Parses `n` or `n/d` with optional leading sign.
    pub fn parse(s: &str) -> Option<Q> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::from_big(BigRational::new(n, d)))
    }
}

impl Default for Q {
    fn default() -> Self {
        Q::zero()
    }
}

impl Add for &Q {
    type Output = Q;
    fn add(self, rhs: &Q) -> Q {
        match (self, rhs) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    Q::from_i128(a + c, b)
                } else {
                    Q::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Q::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl Sub for &Q {
    type Output = Q;
    fn sub(self, rhs: &Q) -> Q {
        self + &(-rhs)
    }
}

impl Mul for &Q {
    type Output = Q;
    fn mul(self, rhs: &Q) -> Q {
        match (self, rhs) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Q::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

impl Div for &Q {
    type Output = Q;
    fn div(self, rhs: &Q) -> Q {
        self * &rhs.recip()
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::Small(n, d) => match n.checked_neg() {
                Some(m) => Q::Small(m, *d),
                None => Q::from_i128(-(*n as i128), *d as i128),
            },
            Q::Big(r) => Q::from_big(-r.clone()),
        }
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.parts();
        if d == "1" {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Which exact field the coefficients of an algebra live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoefficientField {
    Rationals,
    GaussianRationals,
}

impl CoefficientField {
    pub fn name(self) -> &'static str {
        match self {
            CoefficientField::Rationals => "QQ",
            CoefficientField::GaussianRationals => "QQ[I]",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "QQ" | "Q" | "rationals" => Some(CoefficientField::Rationals),
            "QQ[I]" | "QI" | "gaussian" => Some(CoefficientField::GaussianRationals),
            _ => None,
        }
    }

    pub fn contains(self, c: &Coeff) -> bool {
        self == CoefficientField::GaussianRationals || c.im.is_zero()
    }
}

/// A Gaussian rational `re + im*I`. Rationals are the `im == 0` subfield.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    pub re: Q,
    pub im: Q,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { re: Q::zero(), im: Q::zero() }
    }

    pub fn one() -> Self {
        Coeff { re: Q::one(), im: Q::zero() }
    }

    pub fn i() -> Self {
        Coeff { re: Q::zero(), im: Q::one() }
    }

    pub fn int(n: i64) -> Self {
        Coeff { re: Q::from_int(n), im: Q::zero() }
    }

    pub fn rat(n: i64, d: i64) -> Self {
        Coeff { re: Q::new(n, d), im: Q::zero() }
    }

    pub fn gauss(re: Q, im: Q) -> Self {
        Coeff { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Coeff {
        Coeff { re: self.re.clone(), im: -&self.im }
    }

    pub fn recip(&self) -> Coeff {
        if self.im.is_zero() {
            return Coeff { re: self.re.recip(), im: Q::zero() };
        }
        let norm = &(&self.re * &self.re) + &(&self.im * &self.im);
        let inv = norm.recip();
        Coeff { re: &self.re * &inv, im: -&(&self.im * &inv) }
    }

    /// True when the rendered form needs parentheses inside a product.
    fn is_compound(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        Coeff { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        *self = &*self + rhs;
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        Coeff { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Coeff { re: &self.re * &rhs.re, im: Q::zero() };
        }
        Coeff {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Div for &Coeff {
    type Output = Coeff;
    fn div(self, rhs: &Coeff) -> Coeff {
        self * &rhs.recip()
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { re: -&self.re, im: -&self.im }
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::int(n)
    }
}

impl From<Q> for Coeff {
    fn from(q: Q) -> Self {
        Coeff { re: q, im: Q::zero() }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "I")
                } else if (-&self.im).is_one() {
                    write!(f, "-I")
                } else {
                    write!(f, "{}*I", self.im)
                }
            }
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}*I)", self.re, -&self.im)
                } else {
                    write!(f, "({}+{}*I)", self.re, self.im)
                }
            }
        }
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Renders `c` as the leading factor of a product term, returning the
/// sign separately so callers can join terms with ` + ` / ` - `.
pub(crate) fn split_sign(c: &Coeff) -> (bool, Coeff) {
    if c.is_compound() {
        return (false, c.clone());
    }
    if c.re.is_negative() || (c.re.is_zero() && c.im.is_negative()) {
        (true, -c)
    } else {
        (false, c.clone())
    }
}

/// Binomial coefficient as an exact rational (used by series expansions).
pub fn binomial(n: u64, k: u64) -> Q {
    if k > n {
        return Q::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= BigInt::from(n - j);
        acc = acc.div_floor(&BigInt::from(j + 1));
    }
    Q::from_big(BigRational::from_integer(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_path_spills_to_big() {
        let big = Q::from_int(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq, Q::Big(_)));
        let back = &sq / &big;
        assert_eq!(back, Q::from_int(i64::MAX));
        assert!(matches!(back, Q::Small(..)));
    }

    #[test]
    fn rational_reduction_is_canonical() {
        assert_eq!(Q::new(6, -4), Q::new(-3, 2));
        assert_eq!(&Q::new(1, 3) + &Q::new(1, 6), Q::new(1, 2));
        assert_eq!(&Q::new(1, 2) - &Q::new(1, 2), Q::zero());
    }

    #[test]
    fn gaussian_inverse() {
        let z = Coeff::gauss(Q::from_int(1), Q::from_int(2));
        let w = &z * &z.recip();
        assert!(w.is_one());
        assert_eq!((&Coeff::i() * &Coeff::i()), Coeff::int(-1));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(Q::parse("-3/6").unwrap().to_string(), "-1/2");
        assert_eq!(Coeff::gauss(Q::new(1, 2), Q::from_int(-1)).to_string(), "(1/2-1*I)");
        assert_eq!(binomial(5, 2), Q::from_int(10));
    }
}
