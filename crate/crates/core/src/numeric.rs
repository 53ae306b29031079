//! Exact rational scalars and rational sampling grids.
//!
//! Every quantity the toolkit computes (metric values, relation values,
//! modulus evaluations, back-and-forth distances) is a [`Rational`]. There is
//! no floating point on any core path.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Rational(self.0.ceil())
    }

    /// Integer value, if this rational is an integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    /// Approximate decimal value, for display only.
    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Whether `0 <= self <= 1`.
    pub fn in_unit_interval(&self) -> bool {
        !self.is_negative() && *self <= Rational::one()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p`, `p/q` and finite decimals such as `0.25` or `-1.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let bad = || ParseRationalError::Invalid(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            return Ok(Rational(BigRational::new(p, q)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int_part: BigInt = match int {
                "" | "-" | "+" => BigInt::zero(),
                _ => int.parse().map_err(|_| bad())?,
            };
            let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
            let scale = num::pow(BigInt::from(10), frac.len());
            let mut value = BigRational::new(frac_part, scale);
            if negative {
                value = -value;
            }
            return Ok(Rational(value + BigRational::from_integer(int_part)));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational(BigRational::from_integer(n)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// Shorthand used throughout tests and examples: `rat(1, 5)` is one fifth.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

/// Parses a comma-separated list of rationals.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|part| part.trim().parse()).collect()
}

/// A rational known to lie in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct UnitValue(Rational);

impl UnitValue {
    pub fn new(value: Rational) -> Option<Self> {
        value.in_unit_interval().then_some(UnitValue(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `min(1, max(0, x))`.
pub fn clamp_unit(x: &Rational) -> UnitValue {
    if x.is_negative() {
        UnitValue(Rational::zero())
    } else if *x > Rational::one() {
        UnitValue(Rational::one())
    } else {
        UnitValue(x.clone())
    }
}

/// The product grid `{0, step, 2*step, ..., bound}^dimension`.
///
/// When `step` does not divide `bound` the last row is `bound` itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatGrid {
    pub dimension: usize,
    pub step: Rational,
    pub bound: Rational,
}

impl RatGrid {
    pub fn new(dimension: usize, step: Rational, bound: Rational) -> Self {
        assert!(step.is_positive(), "grid step must be positive");
        assert!(bound.is_positive(), "grid bound must be positive");
        RatGrid {
            dimension,
            step,
            bound,
        }
    }

    /// The unit cube `[0,1]^dimension` sampled at `step`.
    pub fn unit(dimension: usize, step: Rational) -> Self {
        RatGrid::new(dimension, step, Rational::one())
    }

    /// The sample values along one axis, ascending.
    pub fn axis(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut x = Rational::zero();
        while x < self.bound {
            out.push(x.clone());
            x = x + &self.step;
        }
        out.push(self.bound.clone());
        out
    }

    pub fn len(&self) -> usize {
        self.axis().len().pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographic enumeration of all grid points.
    pub fn points(&self) -> Vec<Vec<Rational>> {
        grid_points(self)
    }

    /// Smallest axis value `>= x`, or `None` when `x` exceeds the bound.
    pub fn ceil_index(&self, x: &Rational) -> Option<usize> {
        if *x > self.bound {
            return None;
        }
        if !x.is_positive() {
            return Some(0);
        }
        let k = (x / &self.step).ceil();
        let k = k.to_i64().expect("grid index overflow") as usize;
        let last = self.axis().len() - 1;
        Some(k.min(last))
    }
}

/// Deterministic lexicographic enumeration of the points of `g`.
pub fn grid_points(g: &RatGrid) -> Vec<Vec<Rational>> {
    let axis = g.axis();
    let mut out: Vec<Vec<Rational>> = vec![Vec::new()];
    for _ in 0..g.dimension {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for x in &axis {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_unit(&rat(3, 2)).into_inner(), Rational::one());
        assert_eq!(clamp_unit(&rat(-1, 4)).into_inner(), Rational::zero());
        assert_eq!(clamp_unit(&rat(2, 5)).into_inner(), rat(2, 5));
    }

    #[test]
    fn grid_examples() {
        let g = RatGrid::new(1, rat(1, 2), Rational::one());
        assert_eq!(
            grid_points(&g),
            vec![vec![rat(0, 1)], vec![rat(1, 2)], vec![rat(1, 1)]]
        );
        let g = RatGrid::new(2, rat(1, 1), Rational::one());
        let zero = Rational::zero();
        let one = Rational::one();
        assert_eq!(
            grid_points(&g),
            vec![
                vec![zero.clone(), zero.clone()],
                vec![zero.clone(), one.clone()],
                vec![one.clone(), zero.clone()],
                vec![one.clone(), one.clone()],
            ]
        );
        let g = RatGrid::new(0, rat(1, 3), Rational::one());
        assert_eq!(grid_points(&g), vec![Vec::<Rational>::new()]);
    }

    #[test]
    fn grid_non_dividing_step_ends_at_bound() {
        let g = RatGrid::new(1, rat(2, 5), Rational::one());
        assert_eq!(g.axis(), vec![rat(0, 1), rat(2, 5), rat(4, 5), rat(1, 1)]);
    }

    #[test]
    fn grid_length_formula() {
        let g = RatGrid::new(3, rat(1, 4), Rational::one());
        assert_eq!(grid_points(&g).len(), 125);
        assert_eq!(g.len(), 125);
    }

    #[test]
    fn parse_and_print() {
        assert_eq!("3/6".parse::<Rational>().unwrap(), rat(1, 2));
        assert_eq!("0.2".parse::<Rational>().unwrap(), rat(1, 5));
        assert_eq!("-1.5".parse::<Rational>().unwrap(), rat(-3, 2));
        assert_eq!("-0.25".parse::<Rational>().unwrap(), rat(-1, 4));
        assert_eq!("7".parse::<Rational>().unwrap(), rat(7, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert_eq!(rat(4, 2).to_string(), "2");
        assert_eq!(rat(-2, 6).to_string(), "-1/3");
    }

    #[test]
    fn ceil_index() {
        let g = RatGrid::unit(1, rat(1, 4));
        assert_eq!(g.ceil_index(&rat(1, 5)), Some(1));
        assert_eq!(g.ceil_index(&rat(1, 4)), Some(1));
        assert_eq!(g.ceil_index(&rat(0, 1)), Some(0));
        assert_eq!(g.ceil_index(&rat(5, 4)), None);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn arb_rat() -> impl Strategy<Value = Rational> {
            (-50i64..50, 1i64..30).prop_map(|(p, q)| rat(p, q))
        }

        proptest! {
            #[test]
            fn field_laws_exact(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
                prop_assert_eq!((&a + &b) + &c, &a + &(&b + &c));
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            }

            #[test]
            fn clamp_idempotent_and_monotone(a in arb_rat(), b in arb_rat()) {
                let ca = clamp_unit(&a).into_inner();
                prop_assert_eq!(clamp_unit(&ca).into_inner(), ca.clone());
                if a <= b {
                    prop_assert!(ca <= clamp_unit(&b).into_inner());
                }
            }

            #[test]
            fn display_roundtrip(a in arb_rat()) {
                prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
            }
        }
    }
}
