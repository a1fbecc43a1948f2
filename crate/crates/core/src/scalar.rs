//! Exact rational scalars, certified enclosures and q-Pochhammer symbols.
//!
//! Every finite quantity in this crate is an exact [`Rational`]. Quantities
//! defined by infinite series or products are returned as an [`Enclosure`],
//! a closed rational interval that provably contains the real value.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (positive denominator,
/// coprime numerator and denominator).
pub type Rational = BigRational;

/// Default bit precision used when enclosure endpoints are rounded outward.
pub const ROUNDING_BITS: u64 = 320;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `x^e` for any integer exponent; `x` must be nonzero when `e < 0`.
pub fn powi(x: &Rational, e: i64) -> Rational {
    let base = if e < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

/// 10^-d as a rational.
pub fn ten_pow_neg(d: u32) -> Rational {
    Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), d as usize))
}

/// Largest dyadic `m / 2^bits` not exceeding `x`.
pub fn round_down(x: &Rational, bits: u64) -> Rational {
    let scale = BigInt::one() << bits;
    let scaled = x.numer() * &scale;
    Rational::new(scaled.div_floor(x.denom()), scale)
}

/// Smallest dyadic `m / 2^bits` not below `x`.
pub fn round_up(x: &Rational, bits: u64) -> Rational {
    -round_down(&-x, bits)
}

/// Renders `x` with exactly `digits` decimals, rounding half to even.
pub fn to_decimal(x: &Rational, digits: u32) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits as usize);
    let abs = x.abs();
    let scaled = abs.numer() * &scale;
    let (mut q, r) = scaled.div_rem(abs.denom());
    let twice: BigInt = &r * 2;
    match twice.cmp(abs.denom()) {
        std::cmp::Ordering::Greater => q += 1,
        std::cmp::Ordering::Equal if q.is_odd() => q += 1,
        _ => {}
    }
    let mut s = q.to_string();
    if digits > 0 {
        let d = digits as usize;
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        s.insert(s.len() - d, '.');
    }
    if x.is_negative() && !q.is_zero() {
        s.insert(0, '-');
    }
    s
}

/// `p/r` rendering used by the `.exact` sidecar files.
pub fn to_exact_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((p, r)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let r = BigInt::from_str(r.trim()).map_err(|_| bad())?;
            if r.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, r))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// The deformation parameter `0 < q < 1`, always rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QParam(Rational);

impl QParam {
    pub fn new(q: Rational) -> Result<Self> {
        if q.is_positive() && q < Rational::one() {
            Ok(QParam(q))
        } else {
            Err(Error::InvalidQ(q.to_string()))
        }
    }

    pub fn from_ratio(p: i64, r: i64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidQ(format!("{p}/{r}")));
        }
        Self::new(rat(p, r))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// `q^e`, negative exponents allowed.
    pub fn pow(&self, e: i64) -> Rational {
        powi(&self.0, e)
    }

    /// Numerator and denominator of `q = p / r`.
    pub fn parts(&self) -> (&BigInt, &BigInt) {
        (self.0.numer(), self.0.denom())
    }
}

impl FromStr for QParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QParam::new(parse_rational(s)?)
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Closed rational interval `[lo, hi]` containing a real quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: Rational,
    hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvertedEnclosure {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x,
        }
    }

    /// `[center - radius, center + radius]`; `radius` must be nonnegative.
    pub fn ball(center: Rational, radius: &Rational) -> Self {
        debug_assert!(!radius.is_negative());
        Enclosure {
            lo: &center - radius,
            hi: center + radius,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        let lo = if self.lo > other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi < other.hi { &self.hi } else { &other.hi };
        (lo <= hi).then(|| Enclosure {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Distance from `x` to the interval (zero if contained).
    pub fn distance_to(&self, x: &Rational) -> Rational {
        if x < &self.lo {
            &self.lo - x
        } else if x > &self.hi {
            x - &self.hi
        } else {
            Rational::zero()
        }
    }

    /// Widens the endpoints to dyadic rationals with `bits` fractional bits.
    pub fn round_out(&self, bits: u64) -> Enclosure {
        Enclosure {
            lo: round_down(&self.lo, bits),
            hi: round_up(&self.hi, bits),
        }
    }

    /// Interval of `|x|` for `x` in `self`.
    pub fn abs(&self) -> Enclosure {
        if self.lo.is_negative() && self.hi.is_positive() {
            Enclosure {
                lo: Rational::zero(),
                hi: self.hi.clone().max(-self.lo.clone()),
            }
        } else if self.hi.is_positive() || self.hi.is_zero() && !self.lo.is_negative() {
            self.clone()
        } else {
            -self.clone()
        }
    }

    pub fn mul_scalar(&self, c: &Rational) -> Enclosure {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if c.is_negative() {
            Enclosure { lo: b, hi: a }
        } else {
            Enclosure { lo: a, hi: b }
        }
    }

    pub fn add_scalar(&self, c: &Rational) -> Enclosure {
        Enclosure {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    pub fn checked_div(&self, other: &Enclosure) -> Result<Enclosure> {
        if other.contains_zero() {
            return Err(Error::DivisionByZeroInterval);
        }
        let inv = Enclosure {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
        };
        Ok(self * &inv)
    }

    /// Outward interval arithmetic on exact endpoints.
    pub fn apply(&self, other: &Enclosure, op: IntervalOp) -> Result<Enclosure> {
        Ok(match op {
            IntervalOp::Add => self + other,
            IntervalOp::Sub => self - other,
            IntervalOp::Mul => self * other,
            IntervalOp::Div => self.checked_div(other)?,
        })
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            to_decimal(&self.lo, 15),
            to_decimal(&self.hi, 15)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul for &Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: &Enclosure) -> Enclosure {
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Div for &Enclosure {
    type Output = Result<Enclosure>;
    fn div(self, rhs: &Enclosure) -> Result<Enclosure> {
        self.checked_div(rhs)
    }
}

/// Finite q-Pochhammer symbol `(a; q)_n = prod_{k=1}^{n} (1 - a q^{k-1})`.
pub fn q_pochhammer(a: &Rational, q: &QParam, n: usize) -> Rational {
    let mut acc = Rational::one();
    let mut aq = a.clone();
    for _ in 0..n {
        acc *= Rational::one() - &aq;
        aq *= q.value();
    }
    acc
}

/// `(a; q)_inf` for `0 <= a < 1`, truncated after `terms` factors.
///
/// The omitted factors all lie in `(0, 1]` and their product is at least
/// `1 - a q^J / (1 - q)`. Endpoints are rounded outward to
/// [`ROUNDING_BITS`] bits after every factor so their size stays bounded.
pub fn q_pochhammer_inf_terms(a: &Rational, q: &QParam, terms: usize) -> Result<Enclosure> {
    if a.is_negative() || a >= &Rational::one() {
        return Err(Error::PochhammerArgument(a.to_string()));
    }
    let mut lo = Rational::one();
    let mut hi = Rational::one();
    let mut aq = a.clone();
    for _ in 0..terms {
        let factor = Rational::one() - &aq;
        lo = round_down(&(lo * &factor), ROUNDING_BITS);
        hi = round_up(&(hi * &factor), ROUNDING_BITS);
        aq *= q.value();
    }
    // aq is now a q^J
    let remainder = aq / (Rational::one() - q.value());
    let tail_lo = Rational::one() - remainder;
    let lo = if tail_lo.is_positive() {
        round_down(&(lo * tail_lo), ROUNDING_BITS)
    } else {
        Rational::zero()
    };
    Enclosure::new(lo, hi)
}

/// `(a; q)_inf` to within `tol` (width), choosing the truncation depth from
/// the remainder bound.
pub fn q_pochhammer_inf_tol(a: &Rational, q: &QParam, tol: &Rational) -> Result<Enclosure> {
    if a.is_negative() || a >= &Rational::one() {
        return Err(Error::PochhammerArgument(a.to_string()));
    }
    // Width is at most a q^J / (1 - q) plus rounding; aim for half of tol.
    let target = tol / int(2);
    let one_minus_q = Rational::one() - q.value();
    let mut terms = 0usize;
    let mut bound = a / &one_minus_q;
    while bound > target {
        bound *= q.value();
        terms += 1;
    }
    q_pochhammer_inf_terms(a, q, terms)
}

/// `(a; q)_inf` with width below `10^-40`.
pub fn q_pochhammer_inf(a: &Rational, q: &QParam) -> Result<Enclosure> {
    q_pochhammer_inf_tol(a, q, &ten_pow_neg(40))
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(x: &Rational) -> i8 {
    match x.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
